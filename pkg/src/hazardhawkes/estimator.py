"""scikit-learn style wrapper around maximum-likelihood fitting."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .inference import FIT_FAMILIES, fit_mle, log_likelihood, time_rescale_test
from .model import EventSequence, HawkesModel
from .simulate import SimConfig, continue_from, simulate


def as_sequence(X, t_start=0.0, t_end=None):
    """Coerce ``X`` (an :class:`EventSequence` or 1-D times) to a sequence."""
    if isinstance(X, EventSequence):
        return X
    times = np.asarray(X, dtype=float)
    if times.ndim == 2 and 1 in times.shape:
        times = times.ravel()
    return EventSequence(times, t_start=t_start, t_end=t_end)


class HawkesEstimator(BaseEstimator):
    """Hawkes process with a parametric excitation kernel.

    Parameters
    ----------
    family : str, default "omori"
        Kernel family to fit.
    n_starts : int, default 5
        Nelder-Mead starting points.
    random_state : int, default 0
        Seeds the starting-point jitter and, unless overridden, sampling.
    init : HawkesModel, optional
        Starting model for the optimiser.
    delta, n_bins :
        Bin width and count for the piecewise family.

    Attributes
    ----------
    model_ : HawkesModel
    fit_result_ : FitResult
    branching_ratio_ : float
    """

    def __init__(self, family="omori", n_starts=5, random_state=0, init=None, delta=None, n_bins=4):
        self.family = family
        self.n_starts = n_starts
        self.random_state = random_state
        self.init = init
        self.delta = delta
        self.n_bins = n_bins

    def fit(self, X, y=None):
        """Fit to event times ``X`` (array or :class:`EventSequence`)."""
        if self.family not in FIT_FAMILIES:
            raise ValueError(f"family must be one of {FIT_FAMILIES}")
        seq = as_sequence(X)
        self.fit_result_ = fit_mle(
            seq,
            self.family,
            self.init,
            n_starts=self.n_starts,
            seed=self.random_state,
            delta=self.delta,
            n_bins=self.n_bins,
        )
        self.model_ = self.fit_result_.model
        self.branching_ratio_ = self.model_.branching_ratio
        self.n_events_in_ = len(seq)
        return self

    def score(self, X, y=None):
        """Log-likelihood of ``X`` under the fitted model."""
        check_is_fitted(self, "model_")
        return log_likelihood(self.model_, as_sequence(X))

    def transform(self, X):
        """Compensator increments (Exp(1) under a correct model)."""
        check_is_fitted(self, "model_")
        return time_rescale_test(self.model_, as_sequence(X)).rescaled_waits

    def gof(self, X):
        check_is_fitted(self, "model_")
        return time_rescale_test(self.model_, as_sequence(X))

    def sample(self, horizon, random_state=None, history=None):
        """Simulate from the fitted model, optionally continuing ``history``."""
        check_is_fitted(self, "model_")
        seed = self.random_state if random_state is None else random_state
        if history is not None:
            return continue_from(as_sequence(history), self.model_, horizon, seed)
        return simulate(SimConfig(self.model_, horizon, seed))

    @classmethod
    def from_model(cls, model, **params):
        """Estimator that is already fitted to ``model``."""
        if not isinstance(model, HawkesModel):
            raise TypeError("model must be a HawkesModel")
        est = cls(family=model.kernel.family, **params)
        est.model_ = model
        est.fit_result_ = None
        est.branching_ratio_ = model.branching_ratio
        return est

