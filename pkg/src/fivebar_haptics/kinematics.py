"""Planar geometry and statics of one inverted five-bar linkage.

Frame convention: origin at the midpoint of the ground link, motors at
(-D/2, 0) and (+D/2, 0), finger side at negative y.  Joint angles are the
interior angles between the outward ground-link direction and the input
link, opening toward the finger side, so the left elbow sits at
(-D/2 - L1*cos(a), -L1*sin(a)) and mirrored on the right.  Servo horn
angles relate to these as theta = 180 deg - alpha (see ``servo``).

All public interfaces take and return degrees and millimetres; radians are
used internally only.  Every function here is pure.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import NearSingular, NoAssembly, NoContactPose, Singular, Unreachable

__all__ = [
    "Branch",
    "Elbow",
    "ElbowConfig",
    "CellState",
    "LinkageGeometry",
    "JointAngles",
    "EffectorPose",
    "ForceBreakdown",
    "SingularityClass",
    "SingularityMargins",
    "Rect",
    "WorkspaceMap",
    "DEFAULT_GEOMETRY",
    "DEFAULT_MARGINS",
    "forward_kinematics",
    "inverse_kinematics",
    "solve_pose",
    "jacobian",
    "effector_force",
    "symmetric_normal_force",
    "workspace_grid",
    "singularity_metric",
    "reach_interval",
    "lateral_reach",
]

_CLOSURE_TOL = 1e-9  # mm, closure residual budget for FK/IK contracts


class Branch(enum.Enum):
    """Which of the two circle-intersection solutions the effector takes."""

    UPPER = "upper"
    LOWER = "lower"


class Elbow(enum.Enum):
    """Per-side IK solution choice; OUT splays the elbow away from the midline."""

    OUT = "out"
    IN = "in"


@dataclass(frozen=True)
class ElbowConfig:
    left: Elbow = Elbow.OUT
    right: Elbow = Elbow.OUT


DEFAULT_ELBOWS = ElbowConfig()


@dataclass(frozen=True)
class LinkageGeometry:
    """Link lengths of one five-bar mechanism, mm.

    ``l1`` input link, ``l2`` output link, ``d`` ground link (motor axis
    separation).
    """

    l1: float
    l2: float
    d: float

    def __post_init__(self):
        if not (self.l1 > 0 and self.l2 > 0):
            raise ValueError("link lengths must be positive")
        if self.d < 0:
            raise ValueError("ground link length must be non-negative")
        if not (self.l1 + self.l2 > self.d / 2):
            raise ValueError("l1 + l2 must exceed d/2; midline workspace is empty")

    @property
    def motor_left(self) -> tuple[float, float]:
        return (-self.d / 2.0, 0.0)

    @property
    def motor_right(self) -> tuple[float, float]:
        return (+self.d / 2.0, 0.0)


DEFAULT_GEOMETRY = LinkageGeometry(l1=35.0, l2=17.0, d=15.0)


@dataclass(frozen=True)
class JointAngles:
    """Interior motor angles in degrees, each strictly inside (0, 180)."""

    alpha_left: float
    alpha_right: float

    def __post_init__(self):
        for name in ("alpha_left", "alpha_right"):
            v = getattr(self, name)
            if not (0.0 < v < 180.0):
                raise ValueError(f"{name}={v!r} outside (0, 180) degrees")


@dataclass(frozen=True)
class EffectorPose:
    """Task-space position, mm; ``branch`` records which solution produced it."""

    x: float
    y: float
    branch: Branch = Branch.UPPER


@dataclass(frozen=True)
class ForceBreakdown:
    """Static force transmission at a symmetric contact pose.

    Angles in degrees, forces in newtons.  The algebraic identities
    phi = 90 - beta, gamma = 90 - alpha + beta, f2 = f1*cos(gamma) and
    fn = 2*f2*cos(phi) hold by construction.
    """

    alpha: float
    beta: float
    gamma: float
    phi: float
    f1: float
    f2: float
    fn: float


class SingularityClass(enum.Enum):
    REGULAR = "regular"
    NEAR_SERIAL = "near_serial"      # a dyad close to folded/extended
    NEAR_PARALLEL = "near_parallel"  # output links close to collinear


@dataclass(frozen=True)
class SingularityMargins:
    """Thresholds separating usable poses from singularity neighborhoods.

    ``det_min`` in mm^2/rad^2; the angular margins in degrees.
    """

    det_min: float = 1.0
    serial_margin_deg: float = 2.0
    parallel_margin_deg: float = 2.0


DEFAULT_MARGINS = SingularityMargins()


class CellState(enum.IntEnum):
    UNREACHABLE = 0
    REACHABLE = 1
    NEAR_SINGULAR = 2


@dataclass(frozen=True)
class Rect:
    """Axis-aligned workspace window, mm."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float


@dataclass(frozen=True)
class WorkspaceMap:
    bounds: Rect
    resolution: float
    cells: np.ndarray  # shape (ny, nx), CellState values, row 0 at y_min

    def cell_center(self, ix: int, iy: int) -> tuple[float, float]:
        return (
            self.bounds.x_min + (ix + 0.5) * self.resolution,
            self.bounds.y_min + (iy + 0.5) * self.resolution,
        )

    def to_csv(self) -> str:
        """One line per cell: x_mm, y_mm, state name."""
        lines = ["x_mm,y_mm,state"]
        ny, nx = self.cells.shape
        for iy in range(ny):
            for ix in range(nx):
                x, y = self.cell_center(ix, iy)
                lines.append(f"{x:.3f},{y:.3f},{CellState(self.cells[iy, ix]).name}")
        return "\n".join(lines) + "\n"


# --- internal helpers -----------------------------------------------------

def _elbow_left(geom: LinkageGeometry, alpha_rad: float) -> tuple[float, float]:
    return (-geom.d / 2.0 - geom.l1 * math.cos(alpha_rad), -geom.l1 * math.sin(alpha_rad))


def _elbow_right(geom: LinkageGeometry, alpha_rad: float) -> tuple[float, float]:
    return (+geom.d / 2.0 + geom.l1 * math.cos(alpha_rad), -geom.l1 * math.sin(alpha_rad))


def _elbows(geom: LinkageGeometry, angles: JointAngles):
    return (
        _elbow_left(geom, math.radians(angles.alpha_left)),
        _elbow_right(geom, math.radians(angles.alpha_right)),
    )


def _circle_intersections(c1, c2, r):
    """Both intersection points of two radius-``r`` circles, or None."""
    dx, dy = c2[0] - c1[0], c2[1] - c1[1]
    d = math.hypot(dx, dy)
    if d < 1e-12 or d > 2.0 * r * (1.0 + 1e-12):
        return None
    ux, uy = dx / d, dy / d
    h = math.sqrt(max(r * r - (d / 2.0) ** 2, 0.0))
    mx, my = (c1[0] + c2[0]) / 2.0, (c1[1] + c2[1]) / 2.0
    # (-uy, ux) is u rotated 90 deg counterclockwise
    return (mx - h * uy, my + h * ux), (mx + h * uy, my - h * ux)


def _dyad_interior_deg(geom: LinkageGeometry, dist: float) -> float:
    """Elbow interior angle of one dyad, 0 = folded, 180 = extended."""
    c = (geom.l1**2 + geom.l2**2 - dist**2) / (2.0 * geom.l1 * geom.l2)
    return math.degrees(math.acos(min(1.0, max(-1.0, c))))


# --- forward / inverse kinematics ----------------------------------------

def forward_kinematics(
    geom: LinkageGeometry, angles: JointAngles, branch: Branch = Branch.UPPER
) -> EffectorPose:
    """Effector position for given motor angles.

    Raises NoAssembly when the elbows sit farther apart than 2*l2 (the
    output links cannot close) or coincide (closure is indeterminate).
    """
    e_left, e_right = _elbows(geom, angles)
    pts = _circle_intersections(e_left, e_right, geom.l2)
    if pts is None:
        raise NoAssembly(
            f"elbow separation {math.dist(e_left, e_right):.6g} mm is outside "
            f"(0, {2 * geom.l2:.6g}] for l2={geom.l2:g}"
        )
    p1, p2 = pts
    upper, lower = (p1, p2) if p1[1] >= p2[1] else (p2, p1)
    x, y = upper if branch is Branch.UPPER else lower
    return EffectorPose(x=x, y=y, branch=branch)


def _side_solution(geom, motor, target, elbow: Elbow, side: str):
    """Elbow position and alpha (deg) of one dyad, or raise Unreachable."""
    rx, ry = target[0] - motor[0], target[1] - motor[1]
    dist = math.hypot(rx, ry)
    lo, hi = abs(geom.l1 - geom.l2), geom.l1 + geom.l2
    tol = 1e-9 * max(1.0, hi)
    if dist > hi + tol or dist < lo - tol:
        raise Unreachable(side, f"target distance {dist:.4f} mm outside [{lo:g}, {hi:g}]")
    a = (dist * dist + geom.l1**2 - geom.l2**2) / (2.0 * dist)
    h = math.sqrt(max(geom.l1**2 - a * a, 0.0))
    ux, uy = rx / dist, ry / dist
    # OUT puts the elbow clockwise of the motor->target ray on the left
    # side and counterclockwise on the right (matching the splayed,
    # crossing configuration of the physical device).
    sign = -1.0 if (side == "left") == (elbow is Elbow.OUT) else +1.0
    ex = motor[0] + a * ux + sign * h * (-uy)
    ey = motor[1] + a * uy + sign * h * ux
    vx, vy = ex - motor[0], ey - motor[1]
    alpha = math.atan2(-vy, -vx) if side == "left" else math.atan2(-vy, vx)
    alpha_deg = math.degrees(alpha)
    if not (0.0 < alpha_deg < 180.0):
        raise Unreachable(side, f"joint angle {alpha_deg:.3f} deg outside (0, 180)")
    return (ex, ey), alpha_deg, dist


def solve_pose(
    geom: LinkageGeometry,
    target: tuple[float, float],
    elbows: ElbowConfig = DEFAULT_ELBOWS,
    margins: SingularityMargins | None = DEFAULT_MARGINS,
) -> tuple[JointAngles, Branch]:
    """Inverse kinematics plus the branch the solution lies on.

    With ``margins`` set, targets whose dyads fall within the fold/extend
    margin raise NearSingular instead of returning a barely-usable pose.
    """
    e_left, alpha_left, dist_left = _side_solution(
        geom, geom.motor_left, target, elbows.left, "left"
    )
    e_right, alpha_right, dist_right = _side_solution(
        geom, geom.motor_right, target, elbows.right, "right"
    )
    if margins is not None:
        for side, dist in (("left", dist_left), ("right", dist_right)):
            interior = _dyad_interior_deg(geom, dist)
            if interior < margins.serial_margin_deg or interior > 180.0 - margins.serial_margin_deg:
                raise NearSingular(
                    f"{side} dyad interior angle {interior:.3f} deg within "
                    f"{margins.serial_margin_deg:g} deg of fold/extension"
                )
    # The target is one of the two closure intersections for these elbows;
    # the other one is its mirror across the elbow-elbow line.
    mirror = _mirror_across(e_left, e_right, target)
    branch = Branch.UPPER if target[1] >= mirror[1] else Branch.LOWER
    return JointAngles(alpha_left=alpha_left, alpha_right=alpha_right), branch


def _mirror_across(a, b, p):
    abx, aby = b[0] - a[0], b[1] - a[1]
    denom = abx * abx + aby * aby
    if denom < 1e-24:
        return p
    t = ((p[0] - a[0]) * abx + (p[1] - a[1]) * aby) / denom
    fx, fy = a[0] + t * abx, a[1] + t * aby
    return (2 * fx - p[0], 2 * fy - p[1])


def inverse_kinematics(
    geom: LinkageGeometry,
    target: tuple[float, float],
    elbows: ElbowConfig = DEFAULT_ELBOWS,
    margins: SingularityMargins | None = DEFAULT_MARGINS,
) -> JointAngles:
    """Motor angles placing the effector at ``target`` (mm)."""
    return solve_pose(geom, target, elbows, margins)[0]


# --- differential kinematics and statics ----------------------------------

def _jacobian_parts(geom: LinkageGeometry, angles: JointAngles, branch: Branch):
    pose = forward_kinematics(geom, angles, branch)
    e_left, e_right = _elbows(geom, angles)
    al = math.radians(angles.alpha_left)
    ar = math.radians(angles.alpha_right)
    r_left = np.array([pose.x - e_left[0], pose.y - e_left[1]])
    r_right = np.array([pose.x - e_right[0], pose.y - e_right[1]])
    de_left = np.array([geom.l1 * math.sin(al), -geom.l1 * math.cos(al)])
    de_right = np.array([-geom.l1 * math.sin(ar), -geom.l1 * math.cos(ar)])
    a_mat = np.vstack([r_left, r_right])
    b_diag = np.array([r_left @ de_left, r_right @ de_right])
    return pose, a_mat, b_diag


def jacobian(
    geom: LinkageGeometry,
    angles: JointAngles,
    branch: Branch = Branch.UPPER,
    margins: SingularityMargins | None = DEFAULT_MARGINS,
) -> np.ndarray:
    """d(x, y)/d(alpha_left, alpha_right) in mm/rad, shape (2, 2).

    Derived from the two closure constraints |p - e_i| = l2:
    rows of A are (p - e_i), so A @ dp = diag(b) @ dalpha.
    """
    _, a_mat, b_diag = _jacobian_parts(geom, angles, branch)
    det_a = a_mat[0, 0] * a_mat[1, 1] - a_mat[0, 1] * a_mat[1, 0]
    if abs(det_a) < 1e-12:
        raise Singular("output links collinear; velocity solution undefined")
    jac_mat = np.linalg.solve(a_mat, np.diag(b_diag))
    det_j = (b_diag[0] * b_diag[1]) / det_a
    if margins is not None and abs(det_j) < margins.det_min:
        raise Singular(f"|det J| = {abs(det_j):.4g} below {margins.det_min:g} mm^2/rad^2")
    return jac_mat


def effector_force(
    geom: LinkageGeometry,
    angles: JointAngles,
    torques: tuple[float, float],
    branch: Branch = Branch.UPPER,
    margins: SingularityMargins | None = DEFAULT_MARGINS,
) -> tuple[float, float]:
    """Static force on the finger (N) from motor torques (N*m).

    Positive torque acts in the servo-positive direction (decreasing
    alpha), the sense that presses toward the finger; at the reference
    pose equal positive torques give a straight push in -y.

    Per side the motor torque supports a force tau/l1 perpendicular to
    the input link at the elbow; its component along the output link is
    carried to the effector, where the link acts in tension (the force
    on the finger points from the effector toward the elbow).  This is
    the transmission model whose symmetric case reduces to
    fn = 2 * (tau/l1) * cos(gamma) * cos(phi).
    """
    jacobian(geom, angles, branch, margins)  # reject near-singular poses
    pose = forward_kinematics(geom, angles, branch)
    e_left, e_right = _elbows(geom, angles)
    total = np.zeros(2)
    for elbow, alpha_deg, tau, side_sign in (
        (e_left, angles.alpha_left, torques[0], -1.0),
        (e_right, angles.alpha_right, torques[1], +1.0),
    ):
        a = math.radians(alpha_deg)
        # pressing sweep direction of the elbow (unit d(elbow)/d(theta))
        w = np.array([side_sign * math.sin(a), math.cos(a)])
        axis = np.array([elbow[0] - pose.x, elbow[1] - pose.y]) / geom.l2
        f1 = tau * 1000.0 / geom.l1  # N, from N*m over mm
        total += f1 * float(w @ axis) * axis
    return (float(total[0]), float(total[1]))


def symmetric_normal_force(
    geom: LinkageGeometry, h: float, tau: float
) -> ForceBreakdown:
    """Full transmission breakdown at the symmetric contact pose of depth ``h``.

    ``tau`` is the per-motor torque in N*m.  Raises NoContactPose when no
    symmetric upper-branch pose exists at that depth.
    """
    try:
        angles, branch = solve_pose(geom, (0.0, -h), DEFAULT_ELBOWS, margins=None)
    except Unreachable as exc:
        raise NoContactPose(f"no symmetric pose at depth {h:g} mm: {exc}") from exc
    if branch is not Branch.UPPER:
        raise NoContactPose(f"symmetric pose at depth {h:g} mm is not on the upper branch")
    alpha = angles.alpha_left
    # angle of the output link above horizontal; atan2 keeps the quadrant
    # right for deep poses where the elbows cross the midline (it reduces
    # to asin((l1*sin(alpha) - h)/l2) whenever the elbow stays outboard)
    elbow_x = geom.d / 2.0 + geom.l1 * math.cos(math.radians(alpha))
    beta = math.degrees(math.atan2(geom.l1 * math.sin(math.radians(alpha)) - h, elbow_x))
    gamma = 90.0 - alpha + beta
    phi = 90.0 - beta
    f1 = tau * 1000.0 / geom.l1
    f2 = f1 * math.cos(math.radians(gamma))
    fn = 2.0 * f2 * math.cos(math.radians(phi))
    return ForceBreakdown(alpha=alpha, beta=beta, gamma=gamma, phi=phi, f1=f1, f2=f2, fn=fn)


# --- workspace and singularity classification ------------------------------

def singularity_metric(
    geom: LinkageGeometry,
    angles: JointAngles,
    branch: Branch = Branch.UPPER,
    margins: SingularityMargins = DEFAULT_MARGINS,
) -> tuple[float, SingularityClass]:
    """(det J, class) without raising near singularities.

    det J -> 0 approaching a serial (folded/extended dyad) singularity and
    diverges approaching a parallel (collinear output links) one.
    """
    pose, a_mat, b_diag = _jacobian_parts(geom, angles, branch)
    det_a = a_mat[0, 0] * a_mat[1, 1] - a_mat[0, 1] * a_mat[1, 0]
    det_j = math.inf if det_a == 0.0 else (b_diag[0] * b_diag[1]) / det_a
    e_left, e_right = _elbows(geom, angles)
    for motor, _elb in ((geom.motor_left, e_left), (geom.motor_right, e_right)):
        interior = _dyad_interior_deg(geom, math.dist(motor, (pose.x, pose.y)))
        if interior < margins.serial_margin_deg or interior > 180.0 - margins.serial_margin_deg:
            return det_j, SingularityClass.NEAR_SERIAL
    # |sin| of the angle between the two output-link directions
    u1 = np.array([pose.x - e_left[0], pose.y - e_left[1]]) / geom.l2
    u2 = np.array([pose.x - e_right[0], pose.y - e_right[1]]) / geom.l2
    cross = abs(u1[0] * u2[1] - u1[1] * u2[0])
    if cross < math.sin(math.radians(margins.parallel_margin_deg)):
        return det_j, SingularityClass.NEAR_PARALLEL
    return det_j, SingularityClass.REGULAR


def workspace_grid(
    geom: LinkageGeometry,
    bounds: Rect,
    resolution: float,
    elbows: ElbowConfig = DEFAULT_ELBOWS,
    margins: SingularityMargins = DEFAULT_MARGINS,
) -> WorkspaceMap:
    """Classify a grid of cell centers as reachable / unreachable / near-singular."""
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    nx = max(int(math.floor((bounds.x_max - bounds.x_min) / resolution + 1e-9)), 0)
    ny = max(int(math.floor((bounds.y_max - bounds.y_min) / resolution + 1e-9)), 0)
    cells = np.full((ny, nx), CellState.UNREACHABLE, dtype=np.int8)
    lo, hi = abs(geom.l1 - geom.l2), geom.l1 + geom.l2
    for iy in range(ny):
        for ix in range(nx):
            x = bounds.x_min + (ix + 0.5) * resolution
            y = bounds.y_min + (iy + 0.5) * resolution
            ok = True
            for motor in (geom.motor_left, geom.motor_right):
                dist = math.hypot(x - motor[0], y - motor[1])
                if dist < lo or dist > hi:
                    ok = False
                    break
            if not ok:
                continue
            try:
                angles, branch = solve_pose(geom, (x, y), elbows, margins=None)
            except Unreachable:
                continue
            det_j, cls = singularity_metric(geom, angles, branch, margins)
            if cls is not SingularityClass.REGULAR or abs(det_j) < margins.det_min:
                cells[iy, ix] = CellState.NEAR_SINGULAR
            else:
                cells[iy, ix] = CellState.REACHABLE
    return WorkspaceMap(bounds=bounds, resolution=resolution, cells=cells)


def reach_interval(geom: LinkageGeometry, y: float) -> tuple[float, float] | None:
    """Outer-annulus x-interval reachable by both dyads on the row ``y``.

    Ignores the inner annulus bound and singularity margins; None when the
    row is beyond maximal reach.
    """
    reach_sq = (geom.l1 + geom.l2) ** 2 - y * y
    if reach_sq <= 0:
        return None
    half = math.sqrt(reach_sq)
    lo = max(-geom.d / 2.0 - half, geom.d / 2.0 - half)
    hi = min(-geom.d / 2.0 + half, geom.d / 2.0 + half)
    if lo > hi:
        return None
    return (lo, hi)


def lateral_reach(geom: LinkageGeometry, h: float, margin_mm: float = 1.0) -> float:
    """Usable half-width of the contact row y = -h, shrunk by ``margin_mm``."""
    interval = reach_interval(geom, -h)
    if interval is None:
        return 0.0
    return max(min(interval[1], -interval[0]) - margin_mm, 0.0)
