"""Hand-rolled reference math for checking the boosting implementation.

Everything here recomputes training quantities from first principles in
pure Python (math.fsum accumulation, scalar sigmoid), taking from the
trained model only the per-round sample-to-leaf partition.
"""
import math


def sigmoid_scalar(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def replay_rounds(y, init_log_odds: float, learning_rate: float,
                  round_trace: list) -> list[dict]:
    """Replay the boosting recurrence round by round.

    For each traced round, recompute probabilities from the running log
    odds, residuals against the labels, per-leaf output values over the
    traced partition, and the shrunken log-odds update.  Returns one dict
    per round with keys p, r, leaf_values, log_odds.
    """
    n = len(y)
    log_odds = [init_log_odds] * n
    replayed = []
    for traced in round_trace:
        p = [sigmoid_scalar(z) for z in log_odds]
        r = [y[i] - p[i] for i in range(n)]
        groups: dict[int, list[int]] = {}
        for i, lid in enumerate(traced["leaf_of"].tolist()):
            groups.setdefault(lid, []).append(i)
        leaf_values = {
            lid: (math.fsum(r[i] for i in members)
                  / (math.fsum(p[i] * (1.0 - p[i]) for i in members) + 1e-12))
            for lid, members in groups.items()
        }
        log_odds = [log_odds[i]
                    + learning_rate * leaf_values[traced["leaf_of"][i]]
                    for i in range(n)]
        replayed.append({"p": p, "r": r, "leaf_values": leaf_values,
                         "log_odds": log_odds})
    return replayed


def max_round_deviation(round_trace: list, replayed: list[dict]) -> float:
    """Largest absolute difference across all traced round quantities."""
    worst = 0.0
    for traced, ours in zip(round_trace, replayed):
        for key in ("p", "r", "log_odds"):
            for a, b in zip(traced[key].tolist(), ours[key]):
                worst = max(worst, abs(a - b))
        for lid, value in ours["leaf_values"].items():
            worst = max(worst, abs(traced["leaf_values"][lid] - value))
    return worst


def final_labels(replayed: list[dict]) -> list[int]:
    """Class decisions from the replayed final-round log odds."""
    return [int(sigmoid_scalar(z) > 0.5) for z in replayed[-1]["log_odds"]]
