"""Synthetic data families with closed-form conditional and marginal games.

Three kinds of family are supported:

* ``GaussianFamily`` — zero-mean jointly Gaussian predictors (the latent
  linear case: any coordinate's conditional expectation is linear in the
  conditioning set).  For quadratic models both the conditional and the
  population marginal game are available in closed form, as are exact
  explanation energies.
* ``DiscreteFamily`` — an explicit finite support; every population quantity
  is an exact enumeration.  Used by the instability and energy diagnostics.
* Named generators — the seven-variable dependence-test model and the
  pedagogical bilinear-response model, reproducible from a seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .games import Game, GameError, members


@dataclass(frozen=True)
class QuadraticModel:
    """f(x) = const + a.x + x'Bx with symmetric B; closed under conditioning."""

    const: float
    linear: np.ndarray
    quad: np.ndarray
    name: str = "quadratic"

    def __post_init__(self) -> None:
        a = np.asarray(self.linear, dtype=np.float64)
        b = np.asarray(self.quad, dtype=np.float64)
        if b.shape != (a.size, a.size):
            raise GameError("quad matrix must be n x n")
        object.__setattr__(self, "linear", a)
        object.__setattr__(self, "quad", (b + b.T) / 2.0)

    @property
    def arity(self) -> int:
        return self.linear.size

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return (self.const + X @ self.linear
                + np.einsum("ki,ij,kj->k", X, self.quad, X))

    @classmethod
    def bilinear(cls, i: int, j: int, coef: float, n: int) -> "QuadraticModel":
        quad = np.zeros((n, n))
        quad[i, j] = quad[j, i] = coef / 2.0
        return cls(0.0, np.zeros(n), quad, name=f"{coef:g}*x{i}*x{j}")

    @classmethod
    def linear_model(cls, coefs, const: float = 0.0) -> "QuadraticModel":
        coefs = np.asarray(coefs, dtype=np.float64)
        return cls(const, coefs, np.zeros((coefs.size, coefs.size)), name="linear")

    def __add__(self, other: "QuadraticModel") -> "QuadraticModel":
        return QuadraticModel(self.const + other.const, self.linear + other.linear,
                              self.quad + other.quad)

    def __sub__(self, other: "QuadraticModel") -> "QuadraticModel":
        return QuadraticModel(self.const - other.const, self.linear - other.linear,
                              self.quad - other.quad)

    def scaled(self, a: float) -> "QuadraticModel":
        return QuadraticModel(a * self.const, a * self.linear, a * self.quad)


class GaussianFamily:
    """Zero-mean Gaussian predictors with covariance ``cov``.

    Conditional expectations are linear in the conditioned coordinates, so the
    conditional game of a quadratic model has a closed form, and so do all the
    second moments needed for exact explanation energies.
    """

    def __init__(self, cov: np.ndarray, name: str = "gaussian"):
        cov = np.asarray(cov, dtype=np.float64)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
            raise GameError("covariance must be square")
        if not np.allclose(cov, cov.T, atol=1e-12):
            raise GameError("covariance must be symmetric")
        eigs = np.linalg.eigvalsh(cov)
        if eigs.min() <= 1e-12:
            raise GameError("covariance must be positive definite")
        self.cov = cov
        self.n = cov.shape[0]
        self.name = name
        self._cond_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    # -- constructors --------------------------------------------------------

    @classmethod
    def pair_chain(cls, rho: float, n: int = 3) -> "GaussianFamily":
        """First two coordinates correlated at ``rho``; the rest independent."""
        if not -1 < rho < 1:
            raise GameError("rho must lie in (-1, 1)")
        cov = np.eye(n)
        cov[0, 1] = cov[1, 0] = rho
        return cls(cov, name=f"pair_chain(rho={rho:g})")

    @classmethod
    def block_independent(cls, blocks: list[list[int]], rho: float = 0.8,
                          n: int | None = None) -> "GaussianFamily":
        """Equicorrelated within each block, independent across blocks."""
        n = n if n is not None else max(max(b) for b in blocks) + 1
        cov = np.eye(n)
        for block in blocks:
            for i in block:
                for j in block:
                    if i != j:
                        cov[i, j] = rho
        return cls(cov, name=f"block_independent(rho={rho:g})")

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "GaussianFamily":
        a = rng.normal(size=(n, n))
        cov = a @ a.T + 0.5 * np.eye(n)
        d = 1.0 / np.sqrt(np.diag(cov))
        return cls(cov * np.outer(d, d), name="random")

    # -- sampling ------------------------------------------------------------

    def sample(self, n_samples: int, rng: np.random.Generator) -> np.ndarray:
        return rng.multivariate_normal(np.zeros(self.n), self.cov, size=n_samples,
                                       method="cholesky")

    def sample_conditional(self, s_mask: int, x_s: np.ndarray, n_samples: int,
                           rng: np.random.Generator) -> np.ndarray:
        """Draw X given X_S = x_S (Monte Carlo fallback for non-quadratic models)."""
        gain, cond_cov = self._conditional_parts(s_mask)
        s_idx = members(s_mask)
        o_idx = [i for i in range(self.n) if i not in s_idx]
        out = np.empty((n_samples, self.n))
        out[:, s_idx] = np.asarray(x_s)[None, :]
        if o_idx:
            mean = gain @ np.asarray(x_s)
            chol = np.linalg.cholesky(cond_cov + 1e-12 * np.eye(len(o_idx)))
            draws = rng.standard_normal((n_samples, len(o_idx))) @ chol.T
            out[:, o_idx] = mean[None, :] + draws
        return out

    # -- conditional machinery -------------------------------------------------

    def _conditional_parts(self, s_mask: int) -> tuple[np.ndarray, np.ndarray]:
        """(gain, conditional covariance) of the complement given X_S."""
        got = self._cond_cache.get(s_mask)
        if got is not None:
            return got
        s_idx = members(s_mask)
        o_idx = [i for i in range(self.n) if i not in s_idx]
        if not s_idx:
            parts = (np.zeros((len(o_idx), 0)), self.cov)
        elif not o_idx:
            parts = (np.zeros((0, len(s_idx))), np.zeros((0, 0)))
        else:
            css = self.cov[np.ix_(s_idx, s_idx)]
            cos = self.cov[np.ix_(o_idx, s_idx)]
            gain = np.linalg.solve(css, cos.T).T
            cond_cov = self.cov[np.ix_(o_idx, o_idx)] - gain @ cos.T
            parts = (gain, cond_cov)
        self._cond_cache[s_mask] = parts
        return parts

    def conditional_map(self, s_mask: int) -> tuple[np.ndarray, np.ndarray]:
        """Matrices (M, C): E[X | X_S=x] = Mx and Cov[X | X_S] = C (full-size)."""
        s_idx = members(s_mask)
        o_idx = [i for i in range(self.n) if i not in s_idx]
        gain, cond_cov = self._conditional_parts(s_mask)
        m = np.zeros((self.n, self.n))
        c = np.zeros((self.n, self.n))
        for i in s_idx:
            m[i, i] = 1.0
        if o_idx and s_idx:
            m[np.ix_(o_idx, s_idx)] = gain
        if o_idx:
            c[np.ix_(o_idx, o_idx)] = cond_cov
        return m, c

    def conditional_quadratic(self, f: QuadraticModel, s_mask: int) -> QuadraticModel:
        """E[f(X) | X_S = x_S] as a quadratic supported on the S coordinates."""
        if not isinstance(f, QuadraticModel):
            raise GameError("closed-form Gaussian games need a QuadraticModel "
                            "(linear / bilinear / quadratic); use the Monte "
                            "Carlo conditional sampler for other models")
        if f.arity != self.n:
            raise GameError("model arity does not match the family")
        m, c = self.conditional_map(s_mask)
        const = f.const + float(np.sum(f.quad * c))
        linear = m.T @ f.linear
        quad = m.T @ f.quad @ m
        return QuadraticModel(const, linear, quad)

    def conditional_game(self, x: np.ndarray, f: QuadraticModel) -> Game:
        """Closed-form conditional game at the explicand ``x``."""
        x = np.asarray(x, dtype=np.float64)

        def val(s_mask: int) -> float:
            g = self.conditional_quadratic(f, s_mask)
            return float(g(x)[0])

        return Game(self.n, fn=val)

    def marginal_quadratic(self, f: QuadraticModel, s_mask: int) -> QuadraticModel:
        """E[f(x_S, X_-S)] as a quadratic in x supported on S (population PDP)."""
        if not isinstance(f, QuadraticModel):
            raise GameError("closed-form Gaussian games need a QuadraticModel "
                            "(linear / bilinear / quadratic)")
        if f.arity != self.n:
            raise GameError("model arity does not match the family")
        s_idx = members(s_mask)
        o_idx = [i for i in range(self.n) if i not in s_idx]
        keep = np.zeros((self.n, self.n))
        for i in s_idx:
            keep[i, i] = 1.0
        cov_o = np.zeros((self.n, self.n))
        if o_idx:
            cov_o[np.ix_(o_idx, o_idx)] = self.cov[np.ix_(o_idx, o_idx)]
        const = f.const + float(np.sum(f.quad * cov_o))
        linear = keep @ f.linear
        quad = keep @ f.quad @ keep
        return QuadraticModel(const, linear, quad)

    def marginal_game(self, x: np.ndarray, f: QuadraticModel) -> Game:
        """Closed-form population marginal game at the explicand ``x``."""
        x = np.asarray(x, dtype=np.float64)

        def val(s_mask: int) -> float:
            g = self.marginal_quadratic(f, s_mask)
            return float(g(x)[0])

        return Game(self.n, fn=val)

    # -- exact second moments --------------------------------------------------

    def mean_of(self, q: QuadraticModel) -> float:
        return q.const + float(np.sum(q.quad * self.cov))

    def second_moment(self, q: QuadraticModel) -> float:
        """E[q(X)^2] for zero-mean Gaussian X."""
        mean = self.mean_of(q)
        bs = q.quad @ self.cov
        var = float(q.linear @ self.cov @ q.linear) + 2.0 * float(np.trace(bs @ bs))
        return var + mean * mean

    def variance_of(self, q: QuadraticModel) -> float:
        return self.second_moment(q) - self.mean_of(q) ** 2

    def conditional_explanation_energy(self, f: QuadraticModel,
                                       wtable: np.ndarray) -> tuple[float, float]:
        """Exact (sum_i E[h_i^2], Var f) for conditional explanations of a
        weighted-form value with coalition weights ``wtable``."""
        n = self.n
        cond = {s: self.conditional_quadratic(f, s) for s in range(1 << n)}
        total = 0.0
        for i in range(n):
            bit = 1 << i
            parts = [(float(wtable[s]), s) for s in range(1 << n) if not s & bit]
            const = sum(w * (cond[s | bit].const - cond[s].const) for w, s in parts)
            linear = sum((w * (cond[s | bit].linear - cond[s].linear)
                          for w, s in parts), start=np.zeros(n))
            quad = sum((w * (cond[s | bit].quad - cond[s].quad)
                        for w, s in parts), start=np.zeros((n, n)))
            total += self.second_moment(QuadraticModel(const, linear, quad))
        return total, self.variance_of(f)


class DiscreteFamily:
    """Finite-support predictors; all population quantities by enumeration."""

    def __init__(self, atoms: np.ndarray, probs: np.ndarray, name: str = "discrete"):
        self.atoms = np.asarray(atoms, dtype=np.float64)
        self.probs = np.asarray(probs, dtype=np.float64)
        if self.atoms.ndim != 2 or self.probs.ndim != 1 \
                or self.atoms.shape[0] != self.probs.size:
            raise GameError("atoms must be (k, n) with k probabilities")
        if abs(self.probs.sum() - 1.0) > 1e-12 or (self.probs < 0).any():
            raise GameError("probs must be a probability vector")
        self.n = self.atoms.shape[1]
        self.name = name

    @classmethod
    def two_point(cls) -> "DiscreteFamily":
        return cls(np.array([[0.0, 0.0], [1.0, 1.0]]), np.array([0.5, 0.5]),
                   name="two_point")

    @classmethod
    def rectangle(cls, p: float) -> "DiscreteFamily":
        """Three atoms; the off-diagonal atom (1, 0) carries probability ``p``."""
        if not 0 < p < 1:
            raise GameError("p must lie in (0, 1)")
        q = (1.0 - p) / 2.0
        return cls(np.array([[0.0, 0.0], [1.0, 1.0], [1.0, 0.0]]),
                   np.array([q, q, p]), name=f"rectangle(p={p:g})")

    @classmethod
    def pm_one(cls, n: int) -> "DiscreteFamily":
        atoms = np.array([[1.0 if s >> i & 1 else -1.0 for i in range(n)]
                          for s in range(1 << n)])
        return cls(atoms, np.full(1 << n, 1.0 / (1 << n)), name=f"pm_one({n})")

    def sample(self, n_samples: int, rng: np.random.Generator) -> np.ndarray:
        idx = rng.choice(self.atoms.shape[0], size=n_samples, p=self.probs)
        return self.atoms[idx]

    def marginal_game(self, x: np.ndarray, f) -> Game:
        """Population marginal game: average f(x_S, atom_-S) over atoms."""
        x = np.asarray(x, dtype=np.float64)

        def val(s_mask: int) -> float:
            mixed = self.atoms.copy()
            for i in members(s_mask):
                mixed[:, i] = x[i]
            return float(self.probs @ np.asarray(f(mixed)))

        return Game(self.n, fn=val)

    def conditional_game(self, x: np.ndarray, f) -> Game:
        """Population conditional game; the explicand must match atoms on S."""
        x = np.asarray(x, dtype=np.float64)
        fx = np.asarray(f(self.atoms))

        def val(s_mask: int) -> float:
            sel = np.ones(self.atoms.shape[0], dtype=bool)
            for i in members(s_mask):
                sel &= self.atoms[:, i] == x[i]
            w = self.probs[sel]
            if w.sum() <= 0:
                raise GameError("explicand lies outside the family support")
            return float(w @ fx[sel] / w.sum())

        return Game(self.n, fn=val)

    def expectation(self, values_at_atoms: np.ndarray) -> float:
        return float(self.probs @ values_at_atoms)

    def l2_norm_sq(self, values_at_atoms: np.ndarray) -> float:
        return float(self.probs @ np.square(values_at_atoms))


def generate_mic_test(n_samples: int, seed: int) -> tuple[np.ndarray, list[str]]:
    """Seven-variable dependence-test model: a quadratic, a sine and a linear
    transform of one latent uniform, an independent uniform, and a noisy
    circle pair."""
    rng = np.random.default_rng(seed)
    x0 = rng.uniform(-4 * math.pi, 4 * math.pi, n_samples)
    x1 = x0 ** 2 + rng.normal(0.0, 1.0, n_samples)
    x2 = np.sin(x0) + rng.normal(0.0, 0.25, n_samples)
    x3 = 0.5 * x0 + rng.normal(0.0, 0.25, n_samples)
    x4 = rng.uniform(0.0, 10.0, n_samples)
    theta = rng.uniform(0.0, 2 * math.pi, n_samples)
    x5 = 2 * np.cos(theta) + rng.normal(0.0, 0.1, n_samples)
    x6 = 2 * np.sin(theta) + rng.normal(0.0, 0.1, n_samples)
    data = np.column_stack([x0, x1, x2, x3, x4, x5, x6])
    return data, [f"x{i}" for i in range(7)]


MIC_TEST_GROUPS = [[0, 1, 2, 3], [4], [5, 6]]


@dataclass
class PedagogicalData:
    X: np.ndarray
    y: np.ndarray
    feature_names: list[str] = field(default_factory=lambda: ["x0", "x1", "x2"])


def generate_pedagogical(n_samples: int, seed: int,
                         delta: float = 0.05) -> PedagogicalData:
    """Latent-uniform predictors with an almost-linear dependent pair, an
    independent split-uniform coordinate, and response 3 * x1 * x2 + noise.

    ``delta`` is the standard deviation of the additive noise on the
    dependent pair.
    """
    rng = np.random.default_rng(seed)
    z = rng.uniform(-1.0, 1.0, n_samples)
    sd = float(delta)
    x0 = z + (rng.normal(0.0, sd, n_samples) if sd else 0.0)
    x1 = math.sqrt(2) * np.sin(z * math.pi / 4) \
        + (rng.normal(0.0, sd, n_samples) if sd else 0.0)
    x2 = rng.uniform(0.5, 1.0, n_samples) * rng.choice([-1.0, 1.0], n_samples)
    X = np.column_stack([x0, x1, x2])
    y = 3 * x1 * x2 + rng.uniform(-0.05, 0.05, n_samples)
    return PedagogicalData(X=X, y=y)


def pedagogical_true_model() -> QuadraticModel:
    return QuadraticModel.bilinear(1, 2, 3.0, 3)


GENERATORS = {"mic-test": "seven-variable dependence test model",
              "pedagogical": "almost-linear dependent pair with bilinear response"}
