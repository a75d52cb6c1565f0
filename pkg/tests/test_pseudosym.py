import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from curvlab import curvature as cv
from curvlab import pseudosym as ps
from curvlab.catalog import builtin, godel_family, product_with_line
from curvlab.exprcore import as_expr, parse, to_text
from curvlab.tensorlab import linear_combination, metric_tensor

P = parse


# -- verdict record ------------------------------------------------------------------

def test_verdict_invariants():
    ps.ConditionVerdict("c", ps.HOLDS)
    ps.ConditionVerdict("c", ps.HOLDS_WITH_FACTOR, factor=P("2"))
    ps.ConditionVerdict("c", ps.FAILS, witness=((0,), P("1")))
    with pytest.raises(ValueError):
        ps.ConditionVerdict("c", ps.HOLDS, factor=P("2"))
    with pytest.raises(ValueError):
        ps.ConditionVerdict("c", ps.FAILS)
    with pytest.raises(ValueError):
        ps.ConditionVerdict("c", ps.HOLDS_WITH_FACTOR)
    with pytest.raises(ValueError):
        ps.ConditionVerdict("c", "maybe")


# -- proportionality ----------------------------------------------------------------

@pytest.mark.parametrize("name", ["R", "C", "S", "G"])
def test_self_proportionality_factor_is_one(godel, name):
    T = ps.base_tensor(godel, name)
    v = ps.check_proportionality(T, T)
    assert v.verdict == ps.HOLDS_WITH_FACTOR and v.factor == 1


@settings(max_examples=20, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(-5, 5).filter(bool), st.integers(1, 4), st.sampled_from(["R", "C", "QgC", "RR"]))
def test_recovered_factor_matches_scaling(p, q, name):
    g = builtin("godel").metric
    T = ps.derived(g, name) if len(name) > 1 else ps.base_tensor(g, name)
    c = as_expr(p) / q * P("exp(x1)")
    v = ps.check_proportionality(T.scale(c), T)
    assert v.verdict == ps.HOLDS_WITH_FACTOR and v.factor == c


def test_proportionality_edge_cases(minkowski, godel):
    R0 = cv.riemann(minkowski)
    v = ps.check_proportionality(R0, R0)
    assert v.verdict == ps.HOLDS and "vacuous" in v.note
    v = ps.check_proportionality(cv.riemann(godel), cv.riemann(godel).scale(0))
    assert v.verdict == ps.NOT_APPLICABLE
    v = ps.check_proportionality(cv.riemann(godel).scale(0), cv.riemann(godel))
    assert v.verdict == ps.HOLDS and "factor 0" in v.note
    v = ps.check_proportionality(cv.weyl(godel), cv.riemann(godel))
    assert v.verdict == ps.FAILS


# -- derived tensors ---------------------------------------------------------------

def test_dot_action_rejects_bad_operands(godel):
    with pytest.raises(ValueError):
        ps.dot_action(cv.ricci(godel), cv.riemann(godel))
    with pytest.raises(ValueError):
        ps.tachibana(cv.riemann(godel), cv.riemann(godel))
    with pytest.raises(ValueError):
        ps.tachibana(metric_tensor(godel), cv.nabla_ricci(godel))


def test_derived_names_and_cache(godel):
    assert ps.derived(godel, "RR") is ps.derived(godel, "RR")
    assert ps.derived(godel, "conhconh").rank == 6
    assert ps.derived(godel, "QSconh").name == "Q(S,conh)"
    with pytest.raises(KeyError):
        ps.derived(godel, "XY")


def test_RR_equals_QSR_on_godel(godel):
    assert ps.check_identity(ps.derived(godel, "RR"), ps.derived(godel, "QSR")).verdict == ps.HOLDS


def test_dot_action_is_linear_in_acted_tensor(godel):
    R, C, S = cv.riemann(godel), cv.weyl(godel), cv.ricci(godel)
    lhs = ps.dot_action(R, linear_combination([2, P("a")], [R, C]))
    rhs = linear_combination([2, P("a")], [ps.dot_action(R, R), ps.dot_action(R, C)])
    assert (lhs - rhs).is_zero()
    assert (ps.tachibana(S.scale(3), R) - ps.tachibana(S, R).scale(3)).is_zero()


# -- first-order conditions ---------------------------------------------------------

def test_first_order_conditions(godel, ex21i, ex21ii):
    assert ps.check_cyclic_parallel(godel).verdict == ps.HOLDS
    assert ps.check_codazzi(godel).verdict == ps.FAILS
    assert ps.check_codazzi(ex21i).verdict == ps.HOLDS
    assert ps.check_cyclic_parallel(ex21i).verdict == ps.FAILS
    assert ps.check_codazzi(ex21ii).verdict == ps.FAILS


# -- quasi-Einstein ------------------------------------------------------------------

def test_quasi_einstein_godel(godel):
    qe = ps.quasi_einstein_analysis(godel)
    assert qe.kind == "quasi" and qe.rho == 0
    assert [to_text(w) for w in qe.omega] == ["0", "a*exp(x1)", "0", "a"]
    assert qe.coefficient == P("1/a^2")


def test_quasi_einstein_ex21(ex21i, ex21ii):
    # values in the Godel-pinned sign convention; see the decisions ledger
    assert ps.quasi_einstein_analysis(ex21i).rho == P("-1/(4*eps*x1^2)")
    assert ps.quasi_einstein_analysis(ex21ii).rho == P("-1/(2*eps*x1^2)")


def test_einstein_and_neither(const_curv, som):
    qe = ps.quasi_einstein_analysis(const_curv)
    assert qe.kind == "einstein" and qe.rho == 3
    assert ps.quasi_einstein_analysis(som).kind == "neither"
    assert ps.check_quasi_einstein(som).verdict == ps.FAILS


# -- compatibility and omega ------------------------------------------------------------

def test_compatibility_on_godel(godel):
    omega = ps.quasi_einstein_analysis(godel).omega
    assert ps.check_riemann_compatible(godel, cv.ricci(godel)).verdict == ps.HOLDS
    assert ps.check_riemann_compatible(godel, omega).verdict == ps.HOLDS
    assert ps.check_riemann_compatible(godel, omega, use_weyl=True).verdict == ps.HOLDS
    assert ps.check_omega_curvature_condition(godel, omega).verdict == ps.FAILS
    assert ps.check_omega_curvature_condition(godel, [0, 0, 0, 0]).verdict == ps.NOT_APPLICABLE
    with pytest.raises(ValueError):
        ps.compatibility_tensor(cv.riemann(godel), [1, 2])


# -- conharmonic identities ---------------------------------------------------------------

@pytest.mark.parametrize("name", ["godel", "ex21i", "ex21ii", "som_raychaudhuri", "minkowski", "const_curv"])
def test_conharmonic_identities(name):
    vs = ps.conharmonic_identities(builtin(name).metric)
    assert [v.condition for v in vs] == ["conh.S", "R.conh", "conh.R", "conh.conh"]
    assert all(v.verdict == ps.HOLDS for v in vs)


# -- families --------------------------------------------------------------------------------

@pytest.mark.parametrize("family", ["vi", "vii", "viii"])
def test_families_hold_for_godel(godel, family):
    assert ps.check_two_parameter_family(family, godel).verdict == ps.HOLDS


@pytest.mark.xfail(strict=True, reason="family (v) as printed holds only for a = 1; see decisions ledger")
def test_family_v_as_printed_holds_for_godel(godel):
    assert ps.check_two_parameter_family("v", godel).verdict == ps.HOLDS


def test_family_v_with_degree_balanced_coefficients(godel):
    # Q(g,R) - 3 Q(S,R) rewritten as Q(g,R) - 3 a^2 Q(S,R)
    a2 = P("a^2")
    bases = [
        {"RC": 2 * a2, "CR": 2 * a2, "QgR": P("2/3"), "QSR": -2 * a2, "QgC": P("-1")},
        {"RC": P("2/3"), "CR": P("2/3"), "QgR": -1 / (9 * a2), "QSR": P("1/3"), "QSC": P("-1")},
    ]
    for coeffs in bases:
        combo = linear_combination(list(coeffs.values()), [ps.derived(godel, k) for k in coeffs])
        assert combo.is_zero()


def test_family_printed_v_holds_at_a_equal_one():
    from curvlab.exprcore import substitute
    from curvlab.tensorlab import MetricDefinition

    g = builtin("godel").metric
    g1 = MetricDefinition("godel_a1", g.coords,
                          tuple(tuple(substitute(c, {"a": 1}) for c in row) for row in g.components))
    assert ps.check_two_parameter_family("v", g1).verdict == ps.HOLDS


@pytest.mark.parametrize("family", ps.FAMILY_IDS)
def test_family_rank_is_at_most_four(godel, family):
    tensors = [ps.derived(godel, nm) for nm in ps.FAMILY_TENSORS[family]]
    assert ps.check_linear_dependence(tensors, godel) == 4


def test_family_applicability(minkowski, ex21ii):
    assert ps.check_two_parameter_family("vi", minkowski).verdict == ps.HOLDS
    assert ps.check_two_parameter_family("vi", ex21ii).verdict == ps.NOT_APPLICABLE


def test_linear_dependence(godel):
    R, C = cv.riemann(godel), cv.weyl(godel)
    assert ps.check_linear_dependence([R, C, (R - C)], godel) == 2
    assert ps.check_linear_dependence([R, R.scale(P("a^2"))], godel) == 1
    assert ps.check_linear_dependence([R, R.scale(P("exp(x1)"))], godel) == 2
    assert ps.check_linear_dependence([R, R.scale(3)], godel) == 1
    with pytest.raises(ValueError):
        ps.check_linear_dependence([R], godel, samples=2)
    assert ps.check_linear_dependence([ps.derived(godel, "QgC"), ps.derived(godel, "CC")], godel) == 1
    assert ps.check_linear_dependence([ps.derived(godel, "RR"), ps.derived(godel, "QSR")], godel) == 1


# -- classification ------------------------------------------------------------------------------

def test_classify_godel_report(godel):
    rep = ps.classify(godel)
    assert [v.condition for v in rep.verdicts] == list(ps.CONDITION_IDS)
    assert rep["weyl_pseudosymmetric"].factor == P("1/(6*a^2)")
    assert rep["weyl_pseudosymmetric"].factor == cv.scalar_curvature(godel) / 6
    assert rep["weyl_dot_conh_pseudosymmetric"].factor == P("1/(6*a^2)")
    assert rep.invariant("kappa") == P("1/a^2")
    assert rep.invariant("signature") == "(-,-,-,+)"
    for cid in ("pseudosymmetric", "ricci_pseudosymmetric", "conformally_pseudosymmetric", "codazzi"):
        assert rep[cid].verdict == ps.FAILS


def test_classify_is_deterministic(ex21i):
    a = ps.classify(ex21i, seed=11, points=4)
    b = ps.classify(ex21i, seed=11, points=4)
    assert [(v.condition, v.verdict, v.note) for v in a.verdicts] == [(v.condition, v.verdict, v.note) for v in b.verdicts]
    assert all(x.factor is None or x.factor.same(y.factor) for x, y in zip(a.verdicts, b.verdicts))
    assert a.points == b.points


def test_classify_minkowski_all_hold(minkowski):
    rep = ps.classify(minkowski)
    assert all(v.verdict in (ps.HOLDS, ps.NOT_APPLICABLE) for v in rep.verdicts)
    assert all(rep[c].verdict == ps.HOLDS for c in ps.CONDITION_IDS[:19])


def test_static_product_satisfies_RR_eq_QSR():
    g = godel_family(P("0"), P("r"), name="static")
    assert ps.classify(g)["RR_eq_QSR"].verdict == ps.HOLDS


def test_product_with_line_weyl_pseudosymmetry(ex21i):
    prod = product_with_line(ex21i, 1)
    v = ps.check_proportionality(ps.derived(prod, "CC"), ps.derived(prod, "QgC"))
    assert v.verdict == ps.HOLDS_WITH_FACTOR
    assert v.factor == P("1/(12*eps*x1^2)")


@pytest.mark.parametrize("name", ["ex21i", "ex21ii"])
def test_pseudosymmetry_equivalence(name):
    g = builtin(name).metric
    v = ps.check_proportionality(ps.derived(g, "RR"), ps.derived(g, "QgR"))
    assert v.verdict == ps.HOLDS_WITH_FACTOR
    T = linear_combination([1, -v.factor], [cv.riemann(g), cv.gaussian(g)])
    T.name = "R-LG"
    assert ps.dot_action(T, T).is_zero()
