// Canvas rendering of one linkage plane: motors, links, effector, the
// finger contact plane at y = -H, and a no-assembly indicator.

import { Geometry, LinkagePose, forwardKinematics } from './kinematics.js';

export interface ViewScale {
  pxPerMm: number;
  originX: number; // canvas x of mechanism x = 0
  originY: number; // canvas y of mechanism y = 0
}

export function defaultScale(canvas: { width: number; height: number }): ViewScale {
  return {
    pxPerMm: 4,
    originX: canvas.width / 2,
    originY: 40,
  };
}

export function toScreen(scale: ViewScale, x: number, y: number): [number, number] {
  // mechanism y points away from the finger; the canvas y axis points down
  return [scale.originX + x * scale.pxPerMm, scale.originY - y * scale.pxPerMm];
}

export class LinkageView {
  private ctx: CanvasRenderingContext2D;
  scale: ViewScale;

  constructor(
    private canvas: HTMLCanvasElement,
    private geom: Geometry,
    private label: string,
  ) {
    const ctx = canvas.getContext('2d');
    if (ctx === null) {
      throw new Error('2d canvas context unavailable');
    }
    this.ctx = ctx;
    this.scale = defaultScale(canvas);
  }

  draw(alphaLeftDeg: number, alphaRightDeg: number, contactDepthMm: number): LinkagePose {
    const pose = forwardKinematics(this.geom, alphaLeftDeg, alphaRightDeg);
    const ctx = this.ctx;
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);

    // contact plane
    const [, planeY] = toScreen(this.scale, 0, -contactDepthMm);
    ctx.strokeStyle = '#b08968';
    ctx.lineWidth = 3;
    ctx.beginPath();
    ctx.moveTo(0, planeY);
    ctx.lineTo(this.canvas.width, planeY);
    ctx.stroke();

    // ground link between the motors
    ctx.strokeStyle = '#555';
    ctx.lineWidth = 2;
    this.segment(pose.motorLeft, pose.motorRight);

    // input links
    ctx.strokeStyle = '#1f6feb';
    ctx.lineWidth = 4;
    this.segment(pose.motorLeft, pose.elbowLeft);
    this.segment(pose.motorRight, pose.elbowRight);

    if (pose.effector === null) {
      ctx.fillStyle = '#c0392b';
      ctx.font = '14px sans-serif';
      ctx.fillText(`${this.label}: no assembly`, 10, 20);
      return pose;
    }

    // output links and effector
    ctx.strokeStyle = '#2da44e';
    this.segment(pose.elbowLeft, pose.effector);
    this.segment(pose.elbowRight, pose.effector);
    for (const joint of [pose.motorLeft, pose.motorRight, pose.elbowLeft, pose.elbowRight]) {
      this.dot(joint.x, joint.y, 4, '#333');
    }
    const touching = -pose.effector.y >= contactDepthMm - 0.1;
    this.dot(pose.effector.x, pose.effector.y, 6, touching ? '#c0392b' : '#2da44e');
    ctx.fillStyle = '#333';
    ctx.font = '14px sans-serif';
    ctx.fillText(this.label, 10, 20);
    return pose;
  }

  private segment(a: { x: number; y: number }, b: { x: number; y: number }): void {
    const [ax, ay] = toScreen(this.scale, a.x, a.y);
    const [bx, by] = toScreen(this.scale, b.x, b.y);
    this.ctx.beginPath();
    this.ctx.moveTo(ax, ay);
    this.ctx.lineTo(bx, by);
    this.ctx.stroke();
  }

  private dot(x: number, y: number, radius: number, color: string): void {
    const [sx, sy] = toScreen(this.scale, x, y);
    this.ctx.fillStyle = color;
    this.ctx.beginPath();
    this.ctx.arc(sx, sy, radius, 0, 2 * Math.PI);
    this.ctx.fill();
  }
}
