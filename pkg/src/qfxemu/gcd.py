"""Great-circle distance between state vectors.

Each amplitude ``c`` becomes a point on the unit sphere with colatitude
``2 * arccos(|c|)`` and longitude ``arg(c)``: magnitude 1 sits on the north
pole, magnitude 0 on the south pole (where the undefined phase stops
mattering). Two vectors are compared amplitude by amplitude through the
central angle between their points, after removing global phase.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

DEFAULT_THRESHOLD = 0.05


def sphere_coords(c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(colatitude, longitude) in radians for each amplitude."""
    c = np.asarray(c, dtype=complex)
    colat = 2.0 * np.arccos(np.clip(np.abs(c), 0.0, 1.0))
    return colat, np.angle(c)


def central_angle(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Haversine central angle between amplitudes mapped onto the sphere."""
    t1, p1 = sphere_coords(a)
    t2, p2 = sphere_coords(b)
    # latitude = pi/2 - colatitude, so cos(latitude) = sin(colatitude)
    hav = (np.sin((t2 - t1) / 2) ** 2
           + np.sin(t1) * np.sin(t2) * np.sin((p2 - p1) / 2) ** 2)
    return 2.0 * np.arcsin(np.sqrt(np.clip(hav, 0.0, 1.0)))


def alignment_index(ref: np.ndarray, rtol: float = 1e-9) -> int:
    """Lowest index whose magnitude is within ``rtol`` of the largest."""
    mag = np.abs(ref)
    return int(np.flatnonzero(mag >= mag.max() * (1 - rtol))[0])


def align_phase(vec: np.ndarray, index: int) -> np.ndarray:
    """Rotate ``vec`` so that ``vec[index]`` is real and non-negative."""
    ang = np.angle(vec[index]) if vec[index] != 0 else 0.0
    return vec * np.exp(-1j * ang)


def gcd_distances(ref: np.ndarray, test: np.ndarray) -> np.ndarray:
    ref = np.asarray(ref, dtype=complex)
    test = np.asarray(test, dtype=complex)
    if ref.shape != test.shape:
        raise ValueError(f"dimension mismatch: {ref.shape} vs {test.shape}")
    k = alignment_index(ref)
    return central_angle(align_phase(ref, k), align_phase(test, k))


@dataclass
class GcdReport:
    circuit_id: str
    nq: int
    max_distance: float
    threshold: float
    passed: bool
    mode: str = "endtoend"
    gate_count: int = 0
    cycles: int = 0
    seconds: float = 0.0
    mean_distance: float = 0.0
    worst_index: int = 0
    saturation_events: int = 0
    notes: list[str] = field(default_factory=list)
    distances: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self, include_distances: bool = False) -> dict:
        d = asdict(self)
        d.pop("distances")
        if include_distances and self.distances is not None:
            d["distances"] = [float(x) for x in self.distances]
        return d

    def to_json(self, include_distances: bool = False) -> str:
        return json.dumps(self.to_dict(include_distances), indent=2)

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{verdict} {self.circuit_id} nq={self.nq} gates={self.gate_count} "
                f"max_gcd={self.max_distance:.3e} (< {self.threshold}) "
                f"cycles={self.cycles} time={self.seconds * 1e3:.3f} ms")


def gcd_distance(ref, test, threshold: float = DEFAULT_THRESHOLD,
                 circuit_id: str = "") -> GcdReport:
    """Compare a reference vector with a test vector.

    Either argument may be a plain complex array or an object with
    ``to_complex()`` (fixed-point state) or ``amps`` (reference state).
    """
    ref_v = _as_complex(ref)
    test_v = _as_complex(test)
    dist = gcd_distances(ref_v, test_v)
    nq = ref_v.size.bit_length() - 1
    worst = int(dist.argmax())
    mx = float(dist[worst])
    return GcdReport(circuit_id, nq, mx, threshold, mx < threshold,
                     mean_distance=float(dist.mean()), worst_index=worst, distances=dist)


def _as_complex(v) -> np.ndarray:
    if hasattr(v, "to_complex"):
        return v.to_complex()
    if hasattr(v, "amps"):
        return v.amps
    return np.asarray(v, dtype=complex)
