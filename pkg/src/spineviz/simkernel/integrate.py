"""Semi-implicit Euler stepping for the spine chain.

Force model per step: joint attachment springs (two offset points per joint,
so relative rotation stretches them and moments transfer), torsional springs
on relative orientation, matching relative dampers, unilateral facet springs,
gravity, and one external force on the topmost body. Velocities integrate
before positions; damper forces are evaluated at the end-of-step velocities
(one linear solve) so strong damping cannot blow up the explicit update.

Unit bridges: a[mm/s^2] = F[N]*1000/m[kg]; alpha[rad/s^2] = tau[N*mm]*1000/I[kg*mm^2].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DivergenceError
from .model import SpineModel

_UNIT = 1000.0  # N -> kg*mm/s^2

# any coordinate beyond this (mm, mm/s, rad/s) is treated as divergence; no
# plausible desk-scale scenario gets anywhere near it
_STATE_BOUND = 1e12


def _quat_to_mat_batch(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    m = np.empty(q.shape[:1] + (3, 3))
    m[:, 0, 0] = 1 - 2 * (y * y + z * z)
    m[:, 0, 1] = 2 * (x * y - w * z)
    m[:, 0, 2] = 2 * (x * z + w * y)
    m[:, 1, 0] = 2 * (x * y + w * z)
    m[:, 1, 1] = 1 - 2 * (x * x + z * z)
    m[:, 1, 2] = 2 * (y * z - w * x)
    m[:, 2, 0] = 2 * (x * z - w * y)
    m[:, 2, 1] = 2 * (y * z + w * x)
    m[:, 2, 2] = 1 - 2 * (x * x + y * y)
    return m


def _quat_mul_batch(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a[:, 0], a[:, 1], a[:, 2], a[:, 3]
    bw, bx, by, bz = b[:, 0], b[:, 1], b[:, 2], b[:, 3]
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=1,
    )


def _quat_rotvec_batch(q: np.ndarray) -> np.ndarray:
    """Rotation-vector log map, batch, scalar-first quaternions."""
    q = np.where(q[:, :1] < 0, -q, q)
    vec = q[:, 1:]
    sin_half = np.linalg.norm(vec, axis=1)
    cos_half = np.clip(q[:, 0], -1.0, 1.0)
    angle = 2.0 * np.arctan2(sin_half, cos_half)
    safe = np.where(sin_half > 1e-12, sin_half, 1.0)
    scale = np.where(sin_half > 1e-12, angle / safe, 2.0)
    return vec * scale[:, None]


def _skew(r: np.ndarray) -> np.ndarray:
    """[r]x so that [r]x @ w == r x w; r is (..., 3)."""
    out = np.zeros(r.shape[:-1] + (3, 3))
    out[..., 0, 1] = -r[..., 2]
    out[..., 0, 2] = r[..., 1]
    out[..., 1, 0] = r[..., 2]
    out[..., 1, 2] = -r[..., 0]
    out[..., 2, 0] = -r[..., 1]
    out[..., 2, 1] = r[..., 0]
    return out


@dataclass(frozen=True)
class SimState:
    """World-frame rigid body state; arrays are (B,3) / (B,4)."""

    positions: np.ndarray
    orientations: np.ndarray  # unit quaternions, scalar-first
    velocities: np.ndarray  # mm/s
    angular_velocities: np.ndarray  # rad/s

    def __post_init__(self):
        for name in ("positions", "orientations", "velocities", "angular_velocities"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))


def rest_state(model: SpineModel) -> SimState:
    return SimState(
        positions=np.array([b.position for b in model.bodies]),
        orientations=np.array([b.orientation for b in model.bodies]),
        velocities=np.zeros((len(model.bodies), 3)),
        angular_velocities=np.zeros((len(model.bodies), 3)),
    )


class CompiledModel:
    """Index arrays and rest geometry precomputed once per model."""

    def __init__(self, model: SpineModel):
        self.model = model
        self.body_ids = [b.id for b in model.bodies]
        index = {b.id: i for i, b in enumerate(model.bodies)}
        self.mass = np.array([b.mass for b in model.bodies])
        self.inertia = np.array([b.inertia for b in model.bodies])
        self.free = np.array([not b.fixed for b in model.bodies])

        J = len(model.joints)
        self.j_cranial = np.array([index[j.cranial] for j in model.joints], dtype=int)
        self.j_caudal = np.array([index[j.caudal] for j in model.joints], dtype=int)
        self.j_disc = np.array([j.disc for j in model.joints], dtype=bool)
        # half the per-axis constant at each of the two attachment points
        self.j_k = np.array([j.stiffness for j in model.joints]).reshape(J, 3) / 2.0
        self.j_c = np.array([j.damping for j in model.joints]).reshape(J, 3) / 2.0
        self.j_krot = np.array([j.rotational_stiffness for j in model.joints])
        self.j_crot = np.array([j.rotational_damping for j in model.joints])

        rest_rot = _quat_to_mat_batch(np.array([b.orientation for b in model.bodies]))
        self.j_local_cranial = np.empty((J, 2, 3))
        self.j_local_caudal = np.empty((J, 2, 3))
        for n, joint in enumerate(model.joints):
            a, b = index[joint.cranial], index[joint.caudal]
            mid = (model.bodies[a].position + model.bodies[b].position) / 2.0
            for k, sx in enumerate((-1.0, 1.0)):
                world = mid + np.array([sx * joint.attachment_offset, 0.0, 0.0])
                self.j_local_cranial[n, k] = rest_rot[a].T @ (world - model.bodies[a].position)
                self.j_local_caudal[n, k] = rest_rot[b].T @ (world - model.bodies[b].position)

        F = len(model.facets)
        self.f_cranial = np.array([index[f.cranial] for f in model.facets], dtype=int)
        self.f_caudal = np.array([index[f.caudal] for f in model.facets], dtype=int)
        self.f_k = np.array([f.stiffness for f in model.facets])
        self.f_clearance = np.array([f.clearance for f in model.facets])
        self.f_local_cranial = np.empty((F, 3))
        self.f_local_caudal = np.empty((F, 3))
        for n, facet in enumerate(model.facets):
            a, b = index[facet.cranial], index[facet.caudal]
            mid = (model.bodies[a].position + model.bodies[b].position) / 2.0
            world = mid + np.array([facet.offset_x, 0.0, 0.0])
            self.f_local_cranial[n] = rest_rot[a].T @ (world - model.bodies[a].position)
            self.f_local_caudal[n] = rest_rot[b].T @ (world - model.bodies[b].position)


@dataclass(frozen=True)
class ForceSnapshot:
    """Per-element loads at one instant, in the order the model lists them."""

    body_forces: np.ndarray  # (B,3) N
    body_torques: np.ndarray  # (B,3) N*mm
    joint_forces: np.ndarray  # (J,3) force the cranial side puts on the joint
    joint_deformations: np.ndarray  # (J,) mm, norm of mean attachment offset
    facet_forces: np.ndarray  # (F,) N, >= 0


def _joint_geometry(compiled: CompiledModel, state: SimState, rot: np.ndarray):
    ic, id_ = compiled.j_cranial, compiled.j_caudal
    arm_c = np.einsum("jab,jkb->jka", rot[ic], compiled.j_local_cranial)
    arm_d = np.einsum("jab,jkb->jka", rot[id_], compiled.j_local_caudal)
    p_c = state.positions[ic, None, :] + arm_c
    p_d = state.positions[id_, None, :] + arm_d
    return arm_c, arm_d, p_d - p_c


def evaluate_forces(
    compiled: CompiledModel,
    state: SimState,
    gravity: np.ndarray,
    external: np.ndarray,
    include_damping: bool = True,
) -> ForceSnapshot:
    x, q = state.positions, state.orientations
    v, w = state.velocities, state.angular_velocities
    B = len(x)
    rot = _quat_to_mat_batch(q)
    forces = np.zeros((B, 3))
    torques = np.zeros((B, 3))

    # gravity + one external force on the topmost (first) body
    forces += compiled.mass[:, None] * np.asarray(gravity) / _UNIT
    forces[0] += np.asarray(external)

    ic, id_ = compiled.j_cranial, compiled.j_caudal
    if len(ic):
        arm_c, arm_d, u = _joint_geometry(compiled, state, rot)
        f_on_caudal = -compiled.j_k[:, None, :] * u
        if include_damping:
            vel_c = v[ic, None, :] + np.cross(w[ic, None, :], arm_c)
            vel_d = v[id_, None, :] + np.cross(w[id_, None, :], arm_d)
            f_on_caudal = f_on_caudal - compiled.j_c[:, None, :] * (vel_d - vel_c)
        joint_forces = f_on_caudal.sum(axis=1)
        joint_deformations = np.linalg.norm(u.mean(axis=1), axis=1)

        np.add.at(forces, id_, joint_forces)
        np.add.at(forces, ic, -joint_forces)
        np.add.at(torques, id_, np.cross(arm_d, f_on_caudal).sum(axis=1))
        np.add.at(torques, ic, np.cross(arm_c, -f_on_caudal).sum(axis=1))

        conj = q[ic] * np.array([1.0, -1.0, -1.0, -1.0])
        rel = _quat_rotvec_batch(_quat_mul_batch(q[id_], conj))
        tau_on_caudal = -compiled.j_krot[:, None] * rel
        if include_damping:
            tau_on_caudal = tau_on_caudal - compiled.j_crot[:, None] * (w[id_] - w[ic])
        np.add.at(torques, id_, tau_on_caudal)
        np.add.at(torques, ic, -tau_on_caudal)
    else:
        joint_forces = np.zeros((0, 3))
        joint_deformations = np.zeros(0)

    fc, fd = compiled.f_cranial, compiled.f_caudal
    if len(fc):
        arm_c = np.einsum("jab,jb->ja", rot[fc], compiled.f_local_cranial)
        arm_d = np.einsum("jab,jb->ja", rot[fd], compiled.f_local_caudal)
        p_c = x[fc] + arm_c
        p_d = x[fd] + arm_d
        # separation along +y; contact pushes only once the clearance is spent
        gap = (p_c[:, 1] - p_d[:, 1]) + compiled.f_clearance
        facet_forces = np.where(gap < 0.0, -compiled.f_k * gap, 0.0)
        f_vec = np.zeros((len(fc), 3))
        f_vec[:, 1] = facet_forces
        np.add.at(forces, fc, f_vec)
        np.add.at(forces, fd, -f_vec)
        np.add.at(torques, fc, np.cross(arm_c, f_vec))
        np.add.at(torques, fd, np.cross(arm_d, -f_vec))
    else:
        facet_forces = np.zeros(0)

    return ForceSnapshot(forces, torques, joint_forces, joint_deformations, facet_forces)


def _damping_matrix(compiled: CompiledModel, state: SimState, rot: np.ndarray) -> np.ndarray:
    """Generalized damping D (6B x 6B) with u = [v, w] per body, so that the
    damper wrench is -D @ u. Built from J^T C J per attachment pair."""
    B = len(state.positions)
    nj = len(compiled.j_cranial)
    if not nj:
        return np.zeros((6 * B, 6 * B))

    arm_c, arm_d, _ = _joint_geometry(compiled, state, rot)
    eye = np.broadcast_to(np.eye(3), (nj, 2, 3, 3))
    jac = np.concatenate(
        [-eye, _skew(arm_c), eye, -_skew(arm_d)], axis=3
    )  # (J, 2, 3, 12): relative attachment velocity from [v_c, w_c, v_d, w_d]
    weighted = compiled.j_c[:, None, :, None] * jac
    blocks = np.einsum("jkam,jkan->jmn", weighted, jac)  # sum over attachments
    blocks[:, 3:6, 3:6] += compiled.j_crot[:, None, None] * np.eye(3)
    blocks[:, 3:6, 9:12] -= compiled.j_crot[:, None, None] * np.eye(3)
    blocks[:, 9:12, 3:6] -= compiled.j_crot[:, None, None] * np.eye(3)
    blocks[:, 9:12, 9:12] += compiled.j_crot[:, None, None] * np.eye(3)

    quad = blocks.reshape(nj, 2, 6, 2, 6).transpose(0, 1, 3, 2, 4)  # (J,2,2,6,6)
    ends = np.stack([compiled.j_cranial, compiled.j_caudal], axis=1)  # (J,2)
    rows = np.repeat(ends, 2, axis=1).reshape(-1)  # a a b b per joint
    cols = np.tile(ends, (1, 2)).reshape(-1)  # a b a b per joint
    d4 = np.zeros((B, B, 6, 6))
    np.add.at(d4, (rows, cols), quad.reshape(-1, 6, 6))
    return d4.transpose(0, 2, 1, 3).reshape(6 * B, 6 * B)


def _advance(
    compiled: CompiledModel,
    state: SimState,
    dt: float,
    gravity: np.ndarray,
    external: np.ndarray,
    time_s: float,
) -> SimState:
    snap = evaluate_forces(compiled, state, gravity, external, include_damping=False)
    B = len(state.positions)
    rot = _quat_to_mat_batch(state.orientations)

    # (A + dt*D) u' = A u + dt * F_explicit, with A = diag(m, I)/1000
    a_diag = np.empty(6 * B)
    a_diag[0::6] = a_diag[1::6] = a_diag[2::6] = compiled.mass / _UNIT
    a_diag[3::6] = a_diag[4::6] = a_diag[5::6] = compiled.inertia / _UNIT
    u = np.empty(6 * B)
    u[0::6], u[1::6], u[2::6] = state.velocities.T
    u[3::6], u[4::6], u[5::6] = state.angular_velocities.T
    f = np.empty(6 * B)
    f[0::6], f[1::6], f[2::6] = snap.body_forces.T
    f[3::6], f[4::6], f[5::6] = snap.body_torques.T

    system = np.diag(a_diag) + dt * _damping_matrix(compiled, state, rot)
    rhs = a_diag * u + dt * f
    locked = np.repeat(~compiled.free, 6)
    system[locked, :] = 0.0
    system[:, locked] = 0.0
    system[locked, locked] = 1.0
    rhs[locked] = 0.0
    with np.errstate(all="ignore"):
        try:
            u_new = np.linalg.solve(system, rhs)
        except np.linalg.LinAlgError:
            u_new = np.full(6 * B, np.nan)

    v = np.stack([u_new[0::6], u_new[1::6], u_new[2::6]], axis=1)
    w = np.stack([u_new[3::6], u_new[4::6], u_new[5::6]], axis=1)
    x = state.positions + v * dt

    if np.any(w):
        omega = np.concatenate([np.zeros((B, 1)), w], axis=1)
        q = state.orientations + 0.5 * dt * _quat_mul_batch(omega, state.orientations)
        norms = np.linalg.norm(q, axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            q = q / norms
    else:
        q = state.orientations

    new = SimState(x, q, v, w)
    for arr in (x, q, v, w):
        with np.errstate(invalid="ignore"):
            bad = ~(np.abs(arr) < _STATE_BOUND).all(axis=1)
        if np.any(bad):
            first = int(np.argmax(bad))
            raise DivergenceError(compiled.body_ids[first], time_s + dt)
    return new


def step(
    model: SpineModel,
    state: SimState,
    dt: float,
    gravity=(0.0, 0.0, 0.0),
    external=(0.0, 0.0, 0.0),
    time_s: float = 0.0,
) -> SimState:
    """One integration step; raises DivergenceError on non-finite state."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    return _advance(
        CompiledModel(model), state, dt, np.asarray(gravity), np.asarray(external), time_s
    )


def kinetic_energy(compiled: CompiledModel, state: SimState) -> float:
    lin = 0.5 * compiled.mass @ np.sum(state.velocities**2, axis=1)
    ang = 0.5 * compiled.inertia @ np.sum(state.angular_velocities**2, axis=1)
    return float(lin + ang)
