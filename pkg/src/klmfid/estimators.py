"""scikit-learn style wrappers.

``OptimalAncilla`` fits the ancilla for a given ``n`` and objective and
predicts success probabilities for batches of Bloch-sphere inputs.
``ChannelFidelityTransformer`` maps rows of coefficient vectors to their
channel fidelities, so it can sit inside a ``Pipeline``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import ancilla, fidelity, spectral

__all__ = ["OptimalAncilla", "ChannelFidelityTransformer", "bloch_states"]

_OBJECTIVES = {
    "fidelity": "optimal_u",
    "plus": "plus_optimal_v",
    "uniform": "uniform",
}


def bloch_states(X):
    """Turn an ``(n_samples, 2)`` array of ``(θ_B, φ_B)`` into qubit states."""
    X = check_array(X, dtype=float)
    if X.shape[1] != 2:
        raise ValueError(f"expected 2 columns (theta, phi), got {X.shape[1]}")
    return [fidelity.QubitState.from_bloch(t, p) for t, p in X]


class OptimalAncilla(BaseEstimator):
    """Ancilla coefficients chosen by ``objective``.

    Parameters
    ----------
    n : int
        Half the number of ancilla modes; the vector has ``n + 1`` entries.
    objective : {"fidelity", "plus", "uniform"}
        ``"fidelity"`` maximizes the channel fidelity, ``"plus"`` the success
        probability of ``|+>``, ``"uniform"`` gives the original KLM state.
    tol : float
        Entrywise tolerance of the eigensolver cross-check.
    validate : bool or None
        Run the cross-check; ``None`` enables it for ``n <= 1000``.

    Attributes
    ----------
    ancilla_ : AncillaCoefficients
    coef_ : ndarray of shape (n + 1,)
    channel_fidelity_ : float
    theta_ : float or None
        Angle-condition root, only for ``objective="fidelity"``.
    """

    def __init__(self, n=2, objective="fidelity", tol=1e-9, validate=None):
        self.n = n
        self.objective = objective
        self.tol = tol
        self.validate = validate

    def fit(self, X=None, y=None):
        if self.objective not in _OBJECTIVES:
            raise ValueError(f"objective must be one of {sorted(_OBJECTIVES)}, got {self.objective!r}")
        if self.objective == "fidelity":
            self.ancilla_ = ancilla.optimal_u(self.n, tol=self.tol, validate=self.validate)
            self.theta_ = spectral.solve_theta(self.n).theta
        elif self.objective == "plus":
            self.ancilla_ = ancilla.plus_optimal_v(self.n, tol=self.tol, validate=self.validate)
            self.theta_ = None
        else:
            self.ancilla_ = ancilla.uniform_klm(self.n)
            self.theta_ = None
        self.coef_ = np.array(self.ancilla_.c)
        self.channel_fidelity_ = fidelity.channel_fidelity(self.ancilla_)
        return self

    def predict(self, X):
        """Success probability for each ``(θ_B, φ_B)`` row of ``X``."""
        check_is_fitted(self, "ancilla_")
        return np.array([fidelity.success_probability(self.ancilla_, s) for s in bloch_states(X)])

    def score(self, X, y=None):
        """Mean success probability over the rows of ``X``."""
        return float(np.mean(self.predict(X)))


class ChannelFidelityTransformer(TransformerMixin, BaseEstimator):
    """Map coefficient vectors (rows) to channel fidelities.

    Rows are normalized before evaluation. With ``nodes`` set, the Bloch
    quadrature is used instead of the quadratic form.
    """

    def __init__(self, nodes=None):
        self.nodes = nodes

    def fit(self, X, y=None):
        X = check_array(X, dtype=float, ensure_min_features=2)
        self.n_features_in_ = X.shape[1]
        self.a_tilde_ = spectral.build_a_tilde(X.shape[1] - 1)
        return self

    def transform(self, X):
        check_is_fitted(self, "a_tilde_")
        X = check_array(X, dtype=float, ensure_min_features=2)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        out = np.empty((X.shape[0], 1))
        for i, row in enumerate(X):
            c = ancilla.custom(row)
            if self.nodes is None:
                out[i, 0] = self.a_tilde_.quadratic_form(c.c)
            else:
                out[i, 0] = fidelity.channel_fidelity_quadrature(c, self.nodes)
        return out
