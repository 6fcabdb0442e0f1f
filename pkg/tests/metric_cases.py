"""Twenty hand-constructed metric cases shared by the unit and acceptance suites.

Each case is (label, compute, expected) where compute() returns the metric
value; expected values are float-exact so the comparison is ==.
"""

from mhrag.metrics import category_success_ratio, success_ratio, weighted_success_ratio

from conftest import build_store


def fixture_corpus():
    """Eight documents over four categories, single dummy head space."""
    vec = [[1.0, 0.0]]
    heads = {cid: vec for cid in ("sw1", "sw2", "sw3", "st1", "st2", "tr1", "tr2", "rk1")}
    categories = {
        "sw1": "swords",
        "sw2": "swords",
        "sw3": "swords",
        "st1": "stars",
        "st2": "stars",
        "tr1": "trees",
        "tr2": "trees",
        "rk1": "rocks",
    }
    return build_store(heads, categories=categories)


GT_TEN = [(f"g{i}", f"cat{i}") for i in range(10)]
GT_SWORD_STAR = [("sw1", "swords"), ("st1", "stars")]
GT_THREE = [("sw1", "swords"), ("st1", "stars"), ("tr1", "trees")]


def build_cases(corpus):
    thirty = [f"g{i}" for i in range(4)] + [f"miss{i}" for i in range(26)]
    return [
        # success ratio
        ("xi: 4 of 10 ground-truth docs among 30 retrieved",
         lambda: success_ratio(thirty, GT_TEN), 0.4),
        ("xi: retrieved superset of ground truth",
         lambda: success_ratio([f"g{i}" for i in range(10)] + ["extra"], GT_TEN), 1.0),
        ("xi: disjoint retrieved set",
         lambda: success_ratio(["a", "b", "c"], GT_TEN), 0.0),
        ("xi: one of two",
         lambda: success_ratio(["sw1", "junk"], GT_SWORD_STAR), 0.5),
        ("xi: order of retrieved list is irrelevant",
         lambda: success_ratio([f"g{i}" for i in reversed(range(7))], GT_TEN), 0.7),
        # category success ratio (cap rule: one credit per category)
        ("xi_c: three sword docs cover one of two categories",
         lambda: category_success_ratio(["sw1", "sw2", "sw3"], GT_SWORD_STAR, corpus), 0.5),
        ("xi_c: retrieved equals ground truth",
         lambda: category_success_ratio(["sw1", "st1"], GT_SWORD_STAR, corpus), 1.0),
        ("xi_c: only non-ground-truth categories retrieved",
         lambda: category_success_ratio(["tr1", "tr2", "rk1"], GT_SWORD_STAR, corpus), 0.0),
        ("xi_c: exact match also counts for its category",
         lambda: category_success_ratio(["sw1"], GT_SWORD_STAR, corpus), 0.5),
        ("xi_c: duplicate categories earn a single credit",
         lambda: category_success_ratio(["sw1", "sw2", "sw3", "st1"], GT_SWORD_STAR, corpus), 1.0),
        ("xi_c: one of three categories",
         lambda: category_success_ratio(["tr2"], GT_THREE, corpus), 1 / 3),
        # weighted ratio
        ("xi_w: (0.5, 1.0, w=2) = 2/3",
         lambda: weighted_success_ratio(0.5, 1.0, 2), 2 / 3),
        ("xi_w: fixed point at w=2",
         lambda: weighted_success_ratio(0.3, 0.3, 2), 0.3),
        ("xi_w: fixed point at w=7",
         lambda: weighted_success_ratio(0.85, 0.85, 7), 0.85),
        ("xi_w: (0, 1, w=2) = 1/3",
         lambda: weighted_success_ratio(0.0, 1.0, 2), 1 / 3),
        ("xi_w: (1, 0, w=2) = 2/3",
         lambda: weighted_success_ratio(1.0, 0.0, 2), 2 / 3),
        ("xi_w: perfect scores stay perfect",
         lambda: weighted_success_ratio(1.0, 1.0, 5), 1.0),
        ("xi_w: (0.25, 1.0, w=1) averages",
         lambda: weighted_success_ratio(0.25, 1.0, 1), 0.625),
        ("xi_w: (0.4, 0.9, w=4)",
         lambda: weighted_success_ratio(0.4, 0.9, 4), 0.5),
        ("xi_w: (0.5, 0.75, w=3)",
         lambda: weighted_success_ratio(0.5, 0.75, 3), 0.5625),
    ]
