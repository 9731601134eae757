"""Synthetic generative laboratory for the hyperplane-transfer property.

Two-pattern latent model: class-conditional Gaussians over z1, an
independent Gaussian background z2, and an affine mixing map
x = M1 z1 + M2 z2 + c. Datasets A and B share the class laws and priors
while their backgrounds (and maps) may differ; a linear identical/
different classifier fit on pairs from A then keeps working on B because
the pair difference channel never sees the background.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from absgen.datasets import LabeledDataset
from absgen.errors import ContractError


def _as_cov(cov, dim, what):
    cov = np.asarray(cov, float)
    if cov.shape != (dim, dim):
        raise ContractError(f"{what} covariance must be {dim}x{dim}, got {cov.shape}")
    if not np.allclose(cov, cov.T):
        raise ContractError(f"{what} covariance must be symmetric")
    if np.linalg.eigvalsh(cov).min() <= 0.0:
        raise ContractError(f"{what} covariance must be positive definite")
    return cov


@dataclass
class LatentModel:
    """Gaussian two-pattern generative model with affine mixing."""

    class_means: np.ndarray       # (2, d1)
    class_covs: np.ndarray        # (2, d1, d1)
    bg_mean: np.ndarray           # (d2,)
    bg_cov: np.ndarray            # (d2, d2)
    priors: np.ndarray            # (2,)
    m1: np.ndarray                # (dx, d1)
    m2: np.ndarray                # (dx, d2)
    c: np.ndarray                 # (dx,)

    def __post_init__(self):
        self.class_means = np.asarray(self.class_means, float)
        if self.class_means.ndim != 2 or self.class_means.shape[0] != 2:
            raise ContractError(
                f"class_means must be (2, d1) for two patterns, got {self.class_means.shape}"
            )
        d1 = self.class_means.shape[1]
        self.class_covs = np.stack(
            [_as_cov(c, d1, f"class {i}") for i, c in enumerate(np.asarray(self.class_covs, float))]
        )
        self.bg_mean = np.asarray(self.bg_mean, float).ravel()
        d2 = len(self.bg_mean)
        self.bg_cov = _as_cov(self.bg_cov, d2, "background")
        self.priors = np.asarray(self.priors, float)
        if self.priors.shape != (2,) or np.any(self.priors < 0.0) or \
                not np.isclose(self.priors.sum(), 1.0):
            raise ContractError(f"priors must be two nonnegative values summing to 1, got {self.priors}")
        self.m1 = np.atleast_2d(np.asarray(self.m1, float))
        self.m2 = np.atleast_2d(np.asarray(self.m2, float))
        self.c = np.asarray(self.c, float).ravel()
        dx = self.m1.shape[0]
        if self.m1.shape[1] != d1:
            raise ContractError(f"M1 {self.m1.shape} does not accept z1 of dim {d1}")
        if self.m2.shape != (dx, d2):
            raise ContractError(f"M2 {self.m2.shape} does not map z2 dim {d2} to x dim {dx}")
        if self.c.shape != (dx,):
            raise ContractError(f"offset c {self.c.shape} does not match x dim {dx}")

    @property
    def z1_dim(self) -> int:
        return self.class_means.shape[1]

    @property
    def x_dim(self) -> int:
        return self.m1.shape[0]

    def induced_gaussian(self, label: int):
        """Mean and covariance of x given pattern ``label``."""
        mean = self.m1 @ self.class_means[label] + self.m2 @ self.bg_mean + self.c
        cov = self.m1 @ self.class_covs[label] @ self.m1.T + self.m2 @ self.bg_cov @ self.m2.T
        return mean, cov


def default_models(a: float = 3.0, sigma1: float = 0.75, sigma_b: float = 0.25,
                   bg_shift: float = 5.0, swap_b_means: bool = False):
    """The shipped laboratory configuration: (model_A, model_B).

    Pattern means sit at (-a, 0) and (+a, 0) with isotropic class noise
    sigma1 and background noise sigma_b; B's background mean is shifted
    by ``bg_shift`` on every coordinate. ``swap_b_means`` builds the
    counterexample where B violates the shared-class-law condition.
    """
    eye = np.eye(2)
    means = np.array([[-a, 0.0], [a, 0.0]])
    covs = np.stack([sigma1 ** 2 * eye] * 2)

    def model(bg_mean, class_means):
        return LatentModel(class_means=class_means, class_covs=covs,
                           bg_mean=bg_mean, bg_cov=sigma_b ** 2 * eye,
                           priors=np.array([0.5, 0.5]),
                           m1=eye, m2=eye, c=np.zeros(2))

    b_means = means[::-1] if swap_b_means else means
    return model(np.zeros(2), means), model(np.full(2, bg_shift), b_means)


def generate(model: LatentModel, n: int, rng) -> LabeledDataset:
    """Draw n samples: label from priors, z1 from its class law, z2 shared."""
    if n < 1:
        raise ContractError(f"generate needs n >= 1, got {n}")
    labels = rng.choice(2, size=n, p=model.priors)
    chol1 = [np.linalg.cholesky(c) for c in model.class_covs]
    cholb = np.linalg.cholesky(model.bg_cov)
    z1 = np.empty((n, model.z1_dim))
    for i in (0, 1):
        sel = labels == i
        z1[sel] = model.class_means[i] + rng.standard_normal((int(sel.sum()), model.z1_dim)) @ chol1[i].T
    z2 = model.bg_mean + rng.standard_normal((n, len(model.bg_mean))) @ cholb.T
    x = z1 @ model.m1.T + z2 @ model.m2.T + model.c
    return LabeledDataset(x, labels, split="train", class_names=["w0", "w1"],
                          unit_range=False)


def log_posteriors(x, model: LatentModel) -> np.ndarray:
    """Unnormalized log P(omega_i | x) for both patterns; shape (n, 2)."""
    x = np.atleast_2d(np.asarray(x, float))
    if x.shape[1] != model.x_dim:
        raise ContractError(f"samples of dim {x.shape[1]} do not match x dim {model.x_dim}")
    out = np.empty((len(x), 2))
    for i in (0, 1):
        mean, cov = model.induced_gaussian(i)
        sign, logdet = np.linalg.slogdet(cov)
        if sign <= 0:
            raise ContractError("singular induced covariance; the mixing map loses the likelihood")
        d = x - mean
        maha = np.einsum("ni,ij,nj->n", d, np.linalg.inv(cov), d)
        out[:, i] = -0.5 * (maha + logdet) + np.log(model.priors[i])
    return out


def map_classify(x, model: LatentModel):
    """Maximum-posterior pattern decision for one sample or a batch."""
    x = np.asarray(x, float)
    single = x.ndim == 1
    decisions = np.argmax(log_posteriors(x, model), axis=1)
    return int(decisions[0]) if single else decisions


@dataclass
class ConditionReport:
    """Parametric check of the two shared-structure equalities.

    The first equality compares the class-conditional z1 laws (means and
    covariances), the second the pattern priors. Background laws and
    mixing maps are deliberately not compared.
    """

    class_mean_discrepancy: float
    class_cov_discrepancy: float
    prior_discrepancy: float
    tol: float

    @property
    def class_laws_match(self) -> bool:
        return max(self.class_mean_discrepancy, self.class_cov_discrepancy) <= self.tol

    @property
    def priors_match(self) -> bool:
        return self.prior_discrepancy <= self.tol

    @property
    def satisfied(self) -> bool:
        return self.class_laws_match and self.priors_match

    def to_dict(self) -> dict:
        return {
            "class_mean_discrepancy": self.class_mean_discrepancy,
            "class_cov_discrepancy": self.class_cov_discrepancy,
            "prior_discrepancy": self.prior_discrepancy,
            "tol": self.tol,
            "class_laws_match": self.class_laws_match,
            "priors_match": self.priors_match,
            "satisfied": self.satisfied,
        }


def check_definition3(a: LatentModel, b: LatentModel, tol: float = 1e-9) -> ConditionReport:
    """Do A and B share class-conditional z1 laws and priors?"""
    if a.z1_dim != b.z1_dim:
        raise ContractError(f"z1 dims differ: {a.z1_dim} vs {b.z1_dim}")
    return ConditionReport(
        class_mean_discrepancy=float(np.abs(a.class_means - b.class_means).max()),
        class_cov_discrepancy=float(np.abs(a.class_covs - b.class_covs).max()),
        prior_discrepancy=float(np.abs(a.priors - b.priors).max()),
        tol=tol,
    )


def _pair_log_densities(u, model: LatentModel):
    """Log densities of concatenated pairs under the two pair hypotheses.

    Identical pairs weight each pattern by its squared prior (the share
    of the ordered identical-pair set); different pairs use the single
    canonical ordering, pattern 0 on top.
    """
    dx = model.x_dim
    ua, ub = u[:, :dx], u[:, dx:]

    def log_gauss(x, mean, cov):
        sign, logdet = np.linalg.slogdet(cov)
        d = x - mean
        maha = np.einsum("ni,ij,nj->n", d, np.linalg.inv(cov), d)
        return -0.5 * (maha + logdet + len(mean) * np.log(2.0 * np.pi))

    parts = []
    w = model.priors ** 2
    w = w / w.sum()
    for i in (0, 1):
        mean, cov = model.induced_gaussian(i)
        parts.append(np.log(w[i]) + log_gauss(ua, mean, cov) + log_gauss(ub, mean, cov))
    log_iden = np.logaddexp(parts[0], parts[1])
    m0, c0 = model.induced_gaussian(0)
    m1, c1 = model.induced_gaussian(1)
    log_diff = log_gauss(ua, m0, c0) + log_gauss(ub, m1, c1)
    return log_iden, log_diff


def bayes_pair_accuracy(model: LatentModel, n: int = 200_000, seed: int = 0) -> float:
    """Brute-force Bayes accuracy of the identical/different pair problem.

    Monte Carlo: draw balanced pairs from the model's own pair process and
    classify each with the exact posterior ratio. The estimate carries
    sampling error ~ sqrt(err/n).
    """
    rng = np.random.default_rng(np.random.SeedSequence([0xBA1E, seed]))
    half = n // 2
    chol = [np.linalg.cholesky(model.induced_gaussian(i)[1]) for i in (0, 1)]
    mean = [model.induced_gaussian(i)[0] for i in (0, 1)]

    def draw(i, count):
        return mean[i] + rng.standard_normal((count, model.x_dim)) @ chol[i].T

    w = model.priors ** 2
    iden_class = rng.choice(2, size=half, p=w / w.sum())
    iden = np.concatenate([
        np.where(iden_class[:, None] == 0, draw(0, half), draw(1, half)),
        np.where(iden_class[:, None] == 0, draw(0, half), draw(1, half)),
    ], axis=1)
    diff = np.concatenate([draw(0, n - half), draw(1, n - half)], axis=1)
    u = np.concatenate([iden, diff])
    labels = np.concatenate([np.zeros(half), np.ones(n - half)])
    log_iden, log_diff = _pair_log_densities(u, model)
    preds = (log_diff > log_iden).astype(float)
    return float(np.mean(preds == labels))


def _fit_linear_pair_classifier(ds: LabeledDataset, n_train: int, seed: int):
    """Logistic identical/different classifier on concatenated pairs.

    The problem is convex, so weights start at zero, and training runs on
    mean-centered features: uncentered coordinates with a large mean let
    early optimizer steps drag their weights along with the bias, which
    pollutes the fitted normal. Centering only re-parameterizes the bias,
    so it is folded back afterwards and the returned parameters score raw
    pairs. A short low-lr stage anneals away optimizer noise.
    """
    from absgen import models as M
    from absgen import optim as O
    from absgen import pairs as P

    spec = M.ModelSpec(kind="mlp", output="probability",
                       widths=(2 * ds.samples.shape[1], 1))
    params = M.init_params(spec, seed=seed)
    params["fc0.w"].data[:] = 0.0
    mu = ds.samples.mean(axis=0)
    base = P.make_pair_sampler(ds)

    def sampler(rng, count):
        a, b, labels = base(rng, count)
        return a - mu, b - mu, labels

    O.train(spec, params, sampler, epochs=8, pairs_per_epoch=n_train,
            batch_size=64, seed=seed, optimizer=O.AdamState(lr=0.05))
    O.train(spec, params, sampler, epochs=4, pairs_per_epoch=n_train,
            batch_size=64, seed=seed + 1000, optimizer=O.AdamState(lr=0.005))
    w = params["fc0.w"].data.ravel()
    params["fc0.b"].data -= w @ np.concatenate([mu, mu])
    return spec, params


def _pair_accuracy(spec, params, ds: LabeledDataset, n_test: int, seed: int) -> float:
    from absgen import models as M
    from absgen import pairs as P

    rng = np.random.default_rng(np.random.SeedSequence([0xACC, seed]))
    a, b, labels = P.sample_pairs(ds, n_test, rng)
    scores = M.make_scorer(spec, params)(a, b)
    return float(np.mean((scores >= 0.5).astype(float) == labels))


def hyperplane_transfer(a: LatentModel, b: LatentModel, n_train: int = 4000,
                        n_test: int = 4000, rng=None, check: bool = True):
    """Fit the pair hyperplane on A, evaluate it on B.

    Returns (acc_on_A, acc_on_B, normal_angle_deg) where the angle is
    between the normals of hyperplanes fit independently on A and on B.
    With ``check`` (the default) the shared-structure conditions must
    hold; pass check=False to demonstrate what failure looks like.
    """
    if check:
        report = check_definition3(a, b)
        if not report.satisfied:
            raise ContractError(
                f"A and B do not share class laws and priors: {report.to_dict()}"
            )
    rng = np.random.default_rng(rng)
    seed = int(rng.integers(2 ** 31))
    ds_a = generate(a, max(2 * n_train, 1000), rng)
    ds_a_eval = generate(a, max(n_test, 1000), rng)
    ds_b = generate(b, max(2 * n_train, 1000), rng)

    spec, params_a = _fit_linear_pair_classifier(ds_a, n_train, seed)
    _, params_b = _fit_linear_pair_classifier(ds_b, n_train, seed + 1)

    acc_on_a = _pair_accuracy(spec, params_a, ds_a_eval, n_test, seed)
    acc_on_b = _pair_accuracy(spec, params_a, ds_b, n_test, seed + 1)

    wa = params_a["fc0.w"].data.ravel()
    wb = params_b["fc0.w"].data.ravel()
    cos = float(np.dot(wa, wb) / (np.linalg.norm(wa) * np.linalg.norm(wb)))
    angle = float(np.degrees(np.arccos(np.clip(cos, -1.0, 1.0))))
    return acc_on_a, acc_on_b, angle
