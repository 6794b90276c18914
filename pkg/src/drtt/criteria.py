"""Adversarial-effect scores and acceptance criteria.

Three criteria are supported:

* meaning-preserving: the perturbed source stays similar to the original
  while the forward translation degrades;
* RTT: the source-target-source round trip degrades past a threshold beta;
* DRTT (doubly round-trip): the RTT degradation is combined with a
  target-source-target round trip that must stay stable (below gamma),
  filtering out samples whose reconstruction error comes from the auxiliary
  backward model rather than the model under test.

d_src and d_tgt are percentage decreases of reconstruction similarity and
live in (-inf, 1]; negative values mean the perturbed round trip improved.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .backends import BackendHandle, translate_one
from .corpus import ParallelPair
from .metrics import sentence_bleu

EPSILON_DENOMINATOR = 1e-6


class UnusableSampleError(Exception):
    """The unperturbed sentence itself fails its round trip; skip the sample."""


@dataclass(frozen=True)
class CriterionConfig:
    beta: float = 0.5
    gamma: float = 0.5
    eta: float = 0.7
    alpha: float = 0.3
    epsilon_denominator: float = EPSILON_DENOMINATOR

    def __post_init__(self):
        if self.epsilon_denominator <= 0:
            raise ValueError("epsilon_denominator must be positive")


@dataclass(frozen=True)
class RttScores:
    """Similarities from both round trips plus the derived d scores.

    sim_x_xhat / sim_xd_xdhat come from the source-target-source trip of the
    original and perturbed source; sim_y_yhat / sim_yd_ydhat from the
    target-source-target trip of the original target and of the perturbed
    source's forward translation.
    """

    sim_x_xhat: float
    sim_xd_xdhat: float
    sim_y_yhat: float
    sim_yd_ydhat: float
    d_src: float
    d_tgt: float


def d_src(sim_x_xhat: float, sim_xd_xdhat: float, epsilon: float = EPSILON_DENOMINATOR) -> float:
    """Percentage decrease of source-side reconstruction similarity."""
    if sim_x_xhat < epsilon:
        raise UnusableSampleError(
            f"original source round trip scored {sim_x_xhat}, below {epsilon}"
        )
    return (sim_x_xhat - sim_xd_xdhat) / sim_x_xhat


def d_tgt(sim_y_yhat: float, sim_yd_ydhat: float, epsilon: float = EPSILON_DENOMINATOR) -> float:
    """Percentage decrease of target-side reconstruction similarity."""
    if sim_y_yhat < epsilon:
        raise UnusableSampleError(
            f"original target round trip scored {sim_y_yhat}, below {epsilon}"
        )
    return (sim_y_yhat - sim_yd_ydhat) / sim_y_yhat


def rtt_accept(scores: RttScores, cfg: CriterionConfig) -> bool:
    """Single round-trip criterion: source degradation exceeds beta (strict)."""
    return scores.d_src > cfg.beta


def drtt_accept(scores: RttScores, cfg: CriterionConfig) -> bool:
    """Doubly round-trip criterion: d_src > beta and d_tgt < gamma (strict)."""
    return scores.d_src > cfg.beta and scores.d_tgt < cfg.gamma


def mp_accept(
    sim_x_xd: float,
    sim_y_yprime: float,
    sim_y_ydprime: float,
    cfg: CriterionConfig,
) -> bool:
    """Meaning-preserving criterion: similar source, degraded translation."""
    return sim_x_xd > cfg.eta and (sim_y_yprime - sim_y_ydprime) > cfg.alpha


def sim(reference: Sequence[str], hypothesis: Sequence[str]) -> float:
    """Sentence similarity used everywhere: smoothed sentence BLEU in [0, 1].

    An empty reference (a perturbation deleted every token) scores 0: the
    round trip through it carries no signal.
    """
    if len(reference) == 0:
        return 0.0
    return sentence_bleu(hypothesis, reference).value


def score_pair(
    pair: ParallelPair,
    perturbed_src: Sequence[str],
    fwd: BackendHandle,
    bwd: BackendHandle,
    epsilon: float = EPSILON_DENOMINATOR,
) -> RttScores:
    """Run both round trips for a perturbed source and derive d_src / d_tgt.

    The forward translation of the perturbed source is computed once and
    shared: its backward translation is both the source-side reconstruction
    and the input of the target-side trip.
    """
    x = list(pair.src.tokens)
    y = list(pair.tgt.tokens)
    x_d = list(perturbed_src)

    y_prime = translate_one(fwd, x)
    x_hat = translate_one(bwd, y_prime)
    y_prime_d = translate_one(fwd, x_d)
    x_hat_d = translate_one(bwd, y_prime_d)
    x_back = translate_one(bwd, y)
    y_hat = translate_one(fwd, x_back)
    y_hat_d = translate_one(fwd, x_hat_d)

    sim_x_xhat = sim(x, x_hat)
    sim_xd_xdhat = sim(x_d, x_hat_d)
    sim_y_yhat = sim(y, y_hat)
    sim_yd_ydhat = sim(y_prime_d, y_hat_d)
    return RttScores(
        sim_x_xhat=sim_x_xhat,
        sim_xd_xdhat=sim_xd_xdhat,
        sim_y_yhat=sim_y_yhat,
        sim_yd_ydhat=sim_yd_ydhat,
        d_src=d_src(sim_x_xhat, sim_xd_xdhat, epsilon),
        d_tgt=d_tgt(sim_y_yhat, sim_yd_ydhat, epsilon),
    )
