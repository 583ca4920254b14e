"""Random ellipsoid-intersection instances and their ``.cfp.json`` files.

Each ellipsoid is ``{x : x^T A x + 2 x^T b - alpha <= 0}`` with
``A = gamma I + B^T B`` for a sparse Gaussian B, ``b`` uniform on [0, 1]^n and
``alpha = b^T A b + u``, ``u`` uniform on (0.1, 10]. The origin is then
strictly inside every ellipsoid. The start point is ``(eta, ..., eta)`` with
eta negative and large enough that it lies outside all of them.

Randomness comes from numpy's counter-based Philox generator. The instance
seed feeds a ``SeedSequence`` that is split into one child stream per
ellipsoid, so an instance is reproducible from ``(n, m, seed, gamma, density)``
alone, independently of how instances are scheduled.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError
from .productspace import Diagonal
from .separators import subgradient_product
from .sets import Ellipsoid, ProductSet
from .solvers import Problem

SUFFIX = ".cfp.json"
DEFAULT_GAMMA = 1.0


def _rng(seed):
    return np.random.Generator(np.random.Philox(seed))


def derive_seed(base_seed, *key):
    """64-bit seed for one instance of a suite, from the base seed and a key."""
    ss = np.random.SeedSequence([base_seed, *key])
    return int(ss.generate_state(1, np.uint64)[0])


def _matrix_from_triplets(triplets, n):
    B = np.zeros((n, n))
    for i, j, v in triplets:
        B[i, j] = v
    return B


def _assemble_A(B, gamma):
    A = gamma * np.eye(B.shape[0]) + B.T @ B
    return 0.5 * (A + A.T)


@dataclass(eq=False)
class EllipsoidInstance:
    n: int
    m: int
    seed: int
    gamma: float
    density: float
    B_triplets: list
    b: np.ndarray
    alpha: np.ndarray
    x0: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, EllipsoidInstance):
            return NotImplemented
        return serialize(self) == serialize(other)

    @property
    def A(self):
        return np.array([_assemble_A(_matrix_from_triplets(t, self.n), self.gamma) for t in self.B_triplets])

    def ellipsoids(self):
        return [Ellipsoid(A, b, a) for A, b, a in zip(self.A, self.b, self.alpha)]

    def values(self, x):
        """``g_i(x)`` for every ellipsoid."""
        A = self.A
        return np.einsum("j,ijk,k->i", x, A, x) + 2.0 * self.b @ x - self.alpha

    def problem(self):
        """The product-space problem ``K_1 x ... x K_m`` n D with the cut separator."""
        K = ProductSet(self.ellipsoids())
        return Problem(K, Diagonal(self.n, self.m), subgradient_product(K), feasible_point=np.zeros(self.n * self.m))

    def lifted_x0(self):
        return np.tile(self.x0, self.m)


def gen_ellipsoids(n, m, seed, gamma=DEFAULT_GAMMA, density=None):
    """Generate a feasible random instance with ``m`` ellipsoids in R^n."""
    if n < 2 or m < 1:
        raise ValueError("need n >= 2 and m >= 1")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    p = min(1.0, 2.0 / n) if density is None else float(density)
    if not 0.0 < p <= 1.0:
        raise ValueError("density must lie in (0, 1]")

    triplets, bs, alphas = [], [], []
    for child in np.random.SeedSequence(seed).spawn(m):
        rng = _rng(child)
        mask = rng.random((n, n)) < p
        values = rng.standard_normal((n, n))
        rows, cols = np.nonzero(mask)
        trip = [(int(i), int(j), float(values[i, j])) for i, j in zip(rows, cols)]
        A = _assemble_A(_matrix_from_triplets(trip, n), gamma)
        b = rng.random(n)
        margin = 10.0 - rng.uniform(0.0, 9.9)  # in (0.1, 10]
        triplets.append(trip)
        bs.append(b)
        alphas.append(float(b @ A @ b) + margin)
    alpha = np.array(alphas)

    inst = EllipsoidInstance(n, m, int(seed), float(gamma), p, triplets, np.array(bs), alpha, np.zeros(n))
    eta = -float(np.max(1.0 + np.sqrt(alpha / gamma)))
    while True:
        inst.x0 = np.full(n, eta)
        if np.all(inst.values(inst.x0) > 0.0):
            return inst
        eta *= 2.0


def serialize(inst):
    """Canonical JSON text of an instance (stable key order, exact floats)."""
    doc = {
        "n": inst.n,
        "m": inst.m,
        "seed": inst.seed,
        "gamma": inst.gamma,
        "density": inst.density,
        "B_triplets": [[[i, j, v] for i, j, v in t] for t in inst.B_triplets],
        "b": [list(map(float, row)) for row in inst.b],
        "alpha": list(map(float, inst.alpha)),
        "x0": list(map(float, inst.x0)),
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def _field(doc, key, kind):
    if key not in doc:
        raise ParseError(f"missing field {key!r}")
    value = doc[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ParseError(f"field {key!r}: expected {kind.__name__}, got {type(value).__name__}")
    return value


def _vector(value, length, name):
    try:
        arr = np.array(value, dtype=np.float64)
    except (TypeError, ValueError):
        raise ParseError(f"{name}: not a list of numbers") from None
    if arr.shape != (length,):
        raise ParseError(f"{name}: expected {length} numbers, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParseError(f"{name}: non-finite entry")
    return arr


def deserialize(text):
    """Parse instance JSON, checking every field and invariant."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be a JSON object")
    n = _field(doc, "n", int)
    m = _field(doc, "m", int)
    if n < 1 or m < 1:
        raise ParseError("fields 'n' and 'm' must be positive")
    seed = _field(doc, "seed", int)
    gamma = _field(doc, "gamma", float)
    if not gamma > 0:
        raise ParseError("field 'gamma' must be positive")
    density = _field(doc, "density", float)
    if not 0.0 < density <= 1.0:
        raise ParseError("field 'density' must lie in (0, 1]")
    raw_trip = _field(doc, "B_triplets", list)
    raw_b = _field(doc, "b", list)
    alpha = _vector(_field(doc, "alpha", list), m, "alpha")
    if len(raw_trip) != m or len(raw_b) != m:
        raise ParseError(f"fields 'B_triplets' and 'b' need {m} entries")
    for i, a in enumerate(alpha):
        if not a > 0:
            raise ParseError(f"alpha[{i}] = {a}: alpha must be positive")
    triplets = []
    for k, trip in enumerate(raw_trip):
        if not isinstance(trip, list):
            raise ParseError(f"B_triplets[{k}]: expected a list of [row, col, value]")
        clean = []
        for t in trip:
            if not (isinstance(t, list) and len(t) == 3 and all(isinstance(c, int) for c in t[:2])):
                raise ParseError(f"B_triplets[{k}]: bad entry {t!r}")
            i, j, v = t
            if not (0 <= i < n and 0 <= j < n):
                raise ParseError(f"B_triplets[{k}]: index ({i}, {j}) out of range for n={n}")
            clean.append((i, j, float(v)))
        triplets.append(clean)
    b = np.array([_vector(row, n, f"b[{i}]") for i, row in enumerate(raw_b)])
    x0 = _vector(_field(doc, "x0", list), n, "x0")
    return EllipsoidInstance(n, m, seed, gamma, density, triplets, b, alpha, x0)


def save(inst, path):
    path = Path(path)
    path.write_text(serialize(inst))
    return path


def load(path):
    try:
        return deserialize(Path(path).read_text())
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}") from None
