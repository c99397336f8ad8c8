// Client-side forward kinematics, used only to draw the mechanism
// smoothly between event-stream updates. It must agree with the service's
// own FK to within 1e-6 mm (a tested invariant); all other numbers shown
// in the console come straight from the service.

export interface Geometry {
  l1: number; // input link, mm
  l2: number; // output link, mm
  d: number; // motor axis separation, mm
}

export interface Point {
  x: number;
  y: number;
}

export interface LinkagePose {
  motorLeft: Point;
  motorRight: Point;
  elbowLeft: Point;
  elbowRight: Point;
  effector: Point | null; // null when the output links cannot close
}

const DEG = Math.PI / 180;

export function elbows(geom: Geometry, alphaLeftDeg: number, alphaRightDeg: number) {
  const al = alphaLeftDeg * DEG;
  const ar = alphaRightDeg * DEG;
  const elbowLeft: Point = {
    x: -geom.d / 2 - geom.l1 * Math.cos(al),
    y: -geom.l1 * Math.sin(al),
  };
  const elbowRight: Point = {
    x: +geom.d / 2 + geom.l1 * Math.cos(ar),
    y: -geom.l1 * Math.sin(ar),
  };
  return { elbowLeft, elbowRight };
}

// Intersection of the two radius-l2 circles about the elbows; the upper
// branch is the solution with the larger y.
export function forwardKinematics(
  geom: Geometry,
  alphaLeftDeg: number,
  alphaRightDeg: number,
  branch: 'upper' | 'lower' = 'upper',
): LinkagePose {
  const { elbowLeft, elbowRight } = elbows(geom, alphaLeftDeg, alphaRightDeg);
  const pose: LinkagePose = {
    motorLeft: { x: -geom.d / 2, y: 0 },
    motorRight: { x: +geom.d / 2, y: 0 },
    elbowLeft,
    elbowRight,
    effector: null,
  };
  const dx = elbowRight.x - elbowLeft.x;
  const dy = elbowRight.y - elbowLeft.y;
  const dist = Math.hypot(dx, dy);
  if (dist < 1e-12 || dist > 2 * geom.l2 * (1 + 1e-12)) {
    return pose; // no assembly
  }
  const ux = dx / dist;
  const uy = dy / dist;
  const h = Math.sqrt(Math.max(geom.l2 * geom.l2 - (dist / 2) * (dist / 2), 0));
  const mx = (elbowLeft.x + elbowRight.x) / 2;
  const my = (elbowLeft.y + elbowRight.y) / 2;
  const p1: Point = { x: mx - h * uy, y: my + h * ux };
  const p2: Point = { x: mx + h * uy, y: my - h * ux };
  const [upper, lower] = p1.y >= p2.y ? [p1, p2] : [p2, p1];
  pose.effector = branch === 'upper' ? upper : lower;
  return pose;
}
