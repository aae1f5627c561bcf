import numpy as np


def assert_rows_are_pmfs(q, tol=1e-9):
    q = np.asarray(q)
    assert (q >= -tol).all(), "Channel has negative entries after an update."
    assert np.abs(q.sum(axis=-1) - 1.0).max() <= tol, "Channel rows no longer sum to 1."


def assert_value_reproduces(reported, recomputed, tol=1e-10):
    assert abs(reported - recomputed) <= tol, (
        f"Reported value {reported!r} does not match its witness ({recomputed!r})."
    )


def assert_within_outer_bound(violations, tol=1e-9):
    """`violations` maps inequality names to the amount by which they fail."""
    bad = {k: v for k, v in violations.items() if v > tol}
    assert not bad, f"Channel-generated point leaves the outer bound: {bad}"


def assert_residuals(residuals, tol, what="witness"):
    bad = {k: v for k, v in residuals.items() if v > tol}
    assert not bad, f"{what} residuals above {tol:g}: {bad}"


def assert_chain_ordered(values, tol=1e-6):
    """values in chain order, each expected <= the next."""
    for (a_name, a), (b_name, b) in zip(values, values[1:]):
        assert a <= b + tol, f"{a_name}={a:.9f} exceeds {b_name}={b:.9f}."
