"""Equilibrium search over population states with model-based beliefs.

A population state couples, for every situation, the pure play of two
groups (four directed actions: within A, A against B, B against A, within
B) with one belief per group over that group's model parameters.  The
state is self-confirming when each group's belief is supported on the
parameters that best explain the data generated by the actual play,
weighted by the share of own-group and cross-group matches, and when the
four actions are subjectively optimal under those beliefs.

The search enumerates pure quadruples per situation, computes the
explanatory objective for all parameters at once, and certifies belief
feasibility either with a degenerate belief or, when no single parameter
rationalizes the play, with a mixture found by linear programming.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .games import StageEnv, as_weights, tie_tolerance
from .inference import (ARGMIN_TOL, DataContext, combine_weighted,
                        kl_minimizers, kl_profile_tables, minimizer_set)

QUAD_KEYS = ("a_AA", "a_AB", "a_BA", "a_BB")

# composing per-situation results across situations multiplies counts;
# beyond this the caller should work situation by situation
MAX_COMPOSED = 200_000

SUPPORT_TOL = 1e-9


def _thread_count(n_workers: int | None) -> int:
    if n_workers is not None:
        return max(1, int(n_workers))
    raw = os.environ.get("ZEITGEIST_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _require_compatible(env: StageEnv, model, who: str) -> None:
    if model.strategic_certainty_form and not env.monitoring.is_perfect(1e-12):
        raise ValueError(
            f"model {who} is in strategic-certainty form, which is only valid "
            "under perfect monitoring; expand it with Model.expand_product first")


@dataclass(frozen=True)
class SituationOutcome:
    """Play quadruple and supporting beliefs for a single situation."""

    situation: str
    quadruple: tuple[int, int, int, int]
    belief_a: np.ndarray
    belief_b: np.ndarray
    minimizers_a: tuple[int, ...]
    minimizers_b: tuple[int, ...]
    all_infinite_a: bool
    all_infinite_b: bool
    mixture_a: bool
    mixture_b: bool

    @property
    def mixture_supported(self) -> bool:
        return self.mixture_a or self.mixture_b


@dataclass(frozen=True)
class Zeitgeist:
    """A full population state: one situation outcome per situation."""

    shares: tuple[float, float]
    outcomes: tuple[SituationOutcome, ...]

    @property
    def play(self) -> np.ndarray:
        return np.array([o.quadruple for o in self.outcomes], dtype=int)

    @property
    def mixture_supported(self) -> bool:
        return any(o.mixture_supported for o in self.outcomes)

    def play_labels(self, env: StageEnv) -> list[dict]:
        rows = []
        for o in self.outcomes:
            rows.append({"situation": o.situation, **{
                k: env.strategies[a] for k, a in zip(QUAD_KEYS, o.quadruple)}})
        return rows


def _subjective_payoff_stack(model, env: StageEnv) -> np.ndarray:
    """Per-parameter payoff matrices under the group's own kernels, (P, n, n)."""
    return np.stack([p.kernel.payoff_matrix(env.utility) for p in model.params])


def _conjectured_columns(model, group: int, member_idx: np.ndarray,
                         default_own: int, default_cross: int) -> tuple[np.ndarray, np.ndarray]:
    """Opponent actions each parameter expects, vs own group and vs the other.

    Free conjectures (None) fall back to the actual play passed as defaults.
    """
    own_cols = np.empty(len(member_idx), dtype=int)
    cross_cols = np.empty(len(member_idx), dtype=int)
    for r, t in enumerate(member_idx):
        conj = model.params[t].conj_a
        c_own = conj[group]
        c_cross = conj[1 - group]
        own_cols[r] = default_own if c_own is None else c_own
        cross_cols[r] = default_cross if c_cross is None else c_cross
    return own_cols, cross_cols


def _feasible_belief(pay: np.ndarray, model, group: int, member_idx: np.ndarray,
                     a_own: int, a_cross: int, opp_own: int, opp_cross: int,
                     tol: float) -> tuple[np.ndarray, bool] | None:
    """Belief over ``member_idx`` making (a_own, a_cross) subjectively optimal.

    Tries degenerate beliefs in index order, then a mixture via LP.  Returns
    (weights over member_idx, used_mixture) or None when infeasible.
    """
    own_cols, cross_cols = _conjectured_columns(model, group, member_idx, opp_own, opp_cross)
    rows = np.arange(len(member_idx))
    sub = pay[member_idx]                      # (m, n, n)
    v_own = sub[rows, :, own_cols]             # (m, n): payoff of each own action
    v_cross = sub[rows, :, cross_cols]

    d_own = v_own[:, a_own][:, None] - v_own   # >= -slack required, all columns
    d_cross = v_cross[:, a_cross][:, None] - v_cross

    def margin_ok(weights: np.ndarray) -> bool:
        # same convention the verifier applies: slack scales with the
        # belief-blended payoffs, not the raw per-parameter stack
        blended = np.concatenate([weights @ v_own, weights @ v_cross])
        s = tie_tolerance(blended, tol)
        return (float((weights @ d_own).min()) >= -s
                and float((weights @ d_cross).min()) >= -s)

    for r in range(len(member_idx)):
        s = tie_tolerance(np.concatenate([v_own[r], v_cross[r]]), tol)
        if d_own[r].min() >= -s and d_cross[r].min() >= -s:
            w = np.zeros(len(member_idx))
            w[r] = 1.0
            return w, False

    if len(member_idx) < 2:
        return None

    # maximize the worst optimality margin so the solution sits as far from
    # the boundary as the parameter set allows; a boundary-hugging belief
    # would be vulnerable to LP tolerance noise downstream
    m = len(member_idx)
    d = np.hstack([d_own, d_cross])            # (m, alternatives)
    c = np.zeros(m + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-d.T, np.ones((d.shape[1], 1))])   # t - w.d <= 0
    b_ub = np.zeros(d.shape[1])
    a_eq = np.append(np.ones(m), 0.0)[None, :]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0],
                  bounds=[(0.0, 1.0)] * m + [(None, None)], method="highs")
    if not res.success:
        return None
    w = np.where(res.x[:m] <= SUPPORT_TOL, 0.0, res.x[:m])
    total = w.sum()
    if total <= 0.0:
        return None
    w /= total
    if not margin_ok(w):
        return None
    return w, int(np.count_nonzero(w)) > 1


def _objective_cube(table: np.ndarray, own_group: int, w_own: float,
                    w_cross: float) -> np.ndarray:
    """Weighted explanatory objective for all (own play, cross play) triples.

    Returns (P, n, n, n) indexed [t, a_own_pair, a_me_cross, a_opp_cross]
    where a_own_pair is the symmetric within-group action.  Zero weights keep
    infinite divergences infinite.
    """
    p_count, n = table.shape[0], table.shape[1]
    diag = table[:, np.arange(n), np.arange(n), own_group]    # (P, n)
    cross = table[:, :, :, 1 - own_group]                     # (P, n, n)
    t_own = np.where(np.isinf(diag), np.inf, w_own * diag)
    t_cross = np.where(np.isinf(cross), np.inf, w_cross * cross)
    return t_own[:, :, None, None] + t_cross[:, None, :, :]


def _member_cut(obj: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Minimizer membership mask over axis 0 plus the all-infinite mask."""
    best = obj.min(axis=0)
    all_inf = np.isinf(best)
    cut = np.where(all_inf, np.inf, best + tol * np.maximum(1.0, np.abs(best)))
    members = (obj <= cut) | all_inf[None, ...]
    return members, all_inf


def enumerate_situation_ez(env: StageEnv, model_a, model_b, G,
                           shares: tuple[float, float], tol: float = ARGMIN_TOL,
                           n_workers: int | None = None) -> list[SituationOutcome]:
    """All self-confirming pure-play outcomes of one situation.

    Group A's belief constraints depend on (a_AA, a_AB, a_BA) only and group
    B's on (a_AB, a_BA, a_BB), so feasibility is resolved per triple and the
    quadruple list is assembled from compatible pairs.
    """
    _require_compatible(env, model_a, "A")
    _require_compatible(env, model_b, "B")
    gi = env.situation_index(G)
    g_label = env.situations[gi]
    n = env.n_strategies
    p_a, p_b = float(shares[0]), float(shares[1])
    if not np.isclose(p_a + p_b, 1.0) or min(p_a, p_b) < 0.0:
        raise ValueError("shares must be a distribution over the two groups")

    table_a = kl_profile_tables(model_a, env, gi)
    table_b = kl_profile_tables(model_b, env, gi)
    pay_a = _subjective_payoff_stack(model_a, env)
    pay_b = _subjective_payoff_stack(model_b, env)

    # objective cubes: A indexed [t, i, j, k], B indexed [t, l, k, j]
    # for the quadruple (i, j, k, l) = (a_AA, a_AB, a_BA, a_BB)
    obj_a = _objective_cube(table_a, 0, p_a, p_b)
    obj_b = _objective_cube(table_b, 1, p_b, p_a)
    members_a, allinf_a = _member_cut(obj_a, tol)
    members_b, allinf_b = _member_cut(obj_b, tol)

    def solve_a(i: int) -> dict:
        out = {}
        for j in range(n):
            for k in range(n):
                m_idx = np.flatnonzero(members_a[:, i, j, k])
                found = _feasible_belief(pay_a, model_a, 0, m_idx, i, j, i, k, tol)
                if found is not None:
                    out[(i, j, k)] = (m_idx, *found, bool(allinf_a[i, j, k]))
        return out

    def solve_b(l: int) -> dict:
        out = {}
        for j in range(n):
            for k in range(n):
                m_idx = np.flatnonzero(members_b[:, l, k, j])
                found = _feasible_belief(pay_b, model_b, 1, m_idx, l, k, l, j, tol)
                if found is not None:
                    out[(j, k, l)] = (m_idx, *found, bool(allinf_b[l, k, j]))
        return out

    workers = _thread_count(n_workers)
    feas_a: dict = {}
    feas_b: dict = {}
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(solve_a, range(n)):
                feas_a.update(part)
            for part in pool.map(solve_b, range(n)):
                feas_b.update(part)
    else:
        for i in range(n):
            feas_a.update(solve_a(i))
        for l in range(n):
            feas_b.update(solve_b(l))

    outcomes = []
    for (i, j, k), (idx_a, w_a, mix_a, inf_a) in sorted(feas_a.items()):
        for l in range(n):
            hit = feas_b.get((j, k, l))
            if hit is None:
                continue
            idx_b, w_b, mix_b, inf_b = hit
            belief_a = np.zeros(model_a.n_params)
            belief_a[idx_a] = w_a
            belief_b = np.zeros(model_b.n_params)
            belief_b[idx_b] = w_b
            outcomes.append(SituationOutcome(
                g_label, (i, j, k, l), belief_a, belief_b,
                tuple(int(t) for t in idx_a), tuple(int(t) for t in idx_b),
                inf_a, inf_b, bool(mix_a), bool(mix_b)))
    return outcomes


def enumerate_ez(env: StageEnv, model_a, model_b, shares: tuple[float, float],
                 tol: float = ARGMIN_TOL, n_workers: int | None = None) -> list[Zeitgeist]:
    """All self-confirming population states at the given group shares.

    Situations decouple, so the state list is the product of per-situation
    outcome lists.  Raises when that product would be unreasonably large.
    """
    per_situation = [
        enumerate_situation_ez(env, model_a, model_b, G, shares, tol, n_workers)
        for G in env.situations]
    count = 1
    for lst in per_situation:
        count *= len(lst)
        if count > MAX_COMPOSED:
            raise ValueError(
                "too many combined states; enumerate per situation instead "
                "(enumerate_situation_ez)")
    return [Zeitgeist((float(shares[0]), float(shares[1])), combo)
            for combo in itertools.product(*per_situation)]


def fitness(z: Zeitgeist, env: StageEnv, q=None) -> np.ndarray:
    """Objective expected payoffs (group A, group B) under random matching."""
    weights = as_weights(q, env.n_situations)
    p_a, p_b = z.shares
    out = np.zeros(2)
    for gi, o in enumerate(z.outcomes):
        a_aa, a_ab, a_ba, a_bb = o.quadruple
        pi = env.payoff_matrix(gi)
        out[0] += weights[gi] * (p_a * pi[a_aa, a_aa] + p_b * pi[a_ab, a_ba])
        out[1] += weights[gi] * (p_b * pi[a_bb, a_bb] + p_a * pi[a_ba, a_ab])
    return out


def situation_fitness(outcome: SituationOutcome, env: StageEnv, G,
                      shares: tuple[float, float]) -> np.ndarray:
    """Objective payoffs (group A, group B) within a single situation."""
    gi = env.situation_index(G)
    a_aa, a_ab, a_ba, a_bb = outcome.quadruple
    pi = env.payoff_matrix(gi)
    p_a, p_b = shares
    return np.array([p_a * pi[a_aa, a_aa] + p_b * pi[a_ab, a_ba],
                     p_b * pi[a_bb, a_bb] + p_a * pi[a_ba, a_ab]])


def conditional_fitness(z: Zeitgeist, env: StageEnv, G, group, versus) -> float:
    """Objective payoff of ``group`` when matched against ``versus`` in G."""
    gi = env.situation_index(G)
    g = _group_index(group)
    h = _group_index(versus)
    a = z.outcomes[gi].quadruple
    pi = env.payoff_matrix(gi)
    mine = a[2 * g + h]       # quadruple order: AA, AB, BA, BB
    theirs = a[2 * h + g]
    return float(pi[mine, theirs])


def _group_index(g) -> int:
    if g in (0, 1):
        return int(g)
    if isinstance(g, str) and g.upper() in ("A", "B"):
        return 0 if g.upper() == "A" else 1
    raise ValueError(f"unknown group {g!r}")


@dataclass(frozen=True)
class GroupCheck:
    situation: str
    group: str
    minimizers: tuple[int, ...]
    all_infinite: bool
    support_ok: bool
    stray_support: tuple[int, ...]
    belief_sum_ok: bool
    br_slack_own: float
    br_slack_cross: float
    ok: bool


@dataclass(frozen=True)
class EZCertificate:
    checks: tuple[GroupCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> list[GroupCheck]:
        return [c for c in self.checks if not c.ok]


def _check_group(env: StageEnv, model, group: int, outcome: SituationOutcome,
                 gi: int, shares: tuple[float, float], tol: float) -> GroupCheck:
    i, j, k, l = outcome.quadruple
    belief = outcome.belief_a if group == 0 else outcome.belief_b
    if group == 0:
        me_own, me_cross, opp_cross = i, j, k
    else:
        me_own, me_cross, opp_cross = l, k, j

    # evaluate only the P weighted objectives, never the full profile table
    ctx = DataContext(group, shares, gi, outcome.quadruple)
    fit = kl_minimizers(model, ctx, env, tol)
    member = np.zeros(model.n_params, dtype=bool)
    member[list(fit.indices)] = True
    stray = np.flatnonzero((belief > SUPPORT_TOL) & ~member)
    support_ok = stray.size == 0
    sum_ok = bool(abs(belief.sum() - 1.0) <= 1e-9 and belief.min() >= -1e-12)

    sup = np.flatnonzero(belief > SUPPORT_TOL)
    if sup.size == 0:
        return GroupCheck(env.situations[gi], "AB"[group], fit.indices,
                          fit.all_infinite, support_ok,
                          tuple(int(t) for t in stray), False,
                          -np.inf, -np.inf, False)
    # payoff columns only for the supported parameters
    own_cols, cross_cols = _conjectured_columns(model, group, sup,
                                                me_own, opp_cross)
    n = env.n_strategies
    v_own = np.zeros(n)
    v_cross = np.zeros(n)
    for r, t in enumerate(sup):
        pay_t = model.params[t].kernel.payoff_matrix(env.utility)
        v_own += belief[t] * pay_t[:, own_cols[r]]
        v_cross += belief[t] * pay_t[:, cross_cols[r]]
    slack = tie_tolerance(np.concatenate([v_own, v_cross]), tol)
    br_own = float(v_own[me_own] - v_own.max())
    br_cross = float(v_cross[me_cross] - v_cross.max())

    ok = support_ok and sum_ok and br_own >= -slack and br_cross >= -slack
    return GroupCheck(env.situations[gi], "AB"[group], fit.indices,
                      fit.all_infinite, support_ok,
                      tuple(int(t) for t in stray), sum_ok,
                      br_own, br_cross, ok)


def verify_ez(z: Zeitgeist, env: StageEnv, model_a, model_b,
              tol: float = ARGMIN_TOL) -> tuple[bool, EZCertificate]:
    """Independent check that a population state is self-confirming.

    Recomputes minimizer sets from scratch, confirms each belief is a
    distribution supported on them, and confirms all four directed actions
    are subjectively optimal.  Returns the verdict plus a per-group
    certificate with the binding slacks.
    """
    _require_compatible(env, model_a, "A")
    _require_compatible(env, model_b, "B")
    checks = []
    for gi, outcome in enumerate(z.outcomes):
        checks.append(_check_group(env, model_a, 0, outcome, gi, z.shares, tol))
        checks.append(_check_group(env, model_b, 1, outcome, gi, z.shares, tol))
    cert = EZCertificate(tuple(checks))
    return cert.ok, cert


def zeitgeist_summary(z: Zeitgeist, env: StageEnv, model_a, model_b,
                      q=None) -> dict:
    """JSON-ready description of one population state."""
    fit = fitness(z, env, q)
    rows = []
    for o in z.outcomes:
        def belief_map(model, w):
            return {model.params[t].label or f"param_{t}": round(float(w[t]), 12)
                    for t in np.flatnonzero(w > SUPPORT_TOL)}
        rows.append({
            "situation": o.situation,
            "play": {key: env.strategies[a] for key, a in zip(QUAD_KEYS, o.quadruple)},
            "play_indices": list(o.quadruple),
            "belief_a": belief_map(model_a, o.belief_a),
            "belief_b": belief_map(model_b, o.belief_b),
            "mixture_a": o.mixture_a,
            "mixture_b": o.mixture_b,
        })
    return {"shares": list(z.shares), "fitness": {"A": fit[0], "B": fit[1]},
            "mixture_supported": z.mixture_supported, "situations": rows}


def render_summaries(zeitgeists: list[Zeitgeist], env: StageEnv, model_a, model_b,
                     q=None) -> str:
    """Human-readable multi-state report."""
    lines = [f"{len(zeitgeists)} self-confirming state(s)"]
    for idx, z in enumerate(zeitgeists):
        s = zeitgeist_summary(z, env, model_a, model_b, q)
        lines.append(f"[{idx}] shares A={z.shares[0]:g} B={z.shares[1]:g} "
                     f"fitness A={s['fitness']['A']:.6g} B={s['fitness']['B']:.6g}"
                     + (" (mixture belief)" if z.mixture_supported else ""))
        for row in s["situations"]:
            play = row["play"]
            lines.append("    {}: AA={} AB={} BA={} BB={}".format(
                row["situation"], play["a_AA"], play["a_AB"], play["a_BA"], play["a_BB"]))
            lines.append(f"      belief A: {row['belief_a']}")
            lines.append(f"      belief B: {row['belief_b']}")
    return "\n".join(lines)
