"""Taylor and near-Taylor polynomial approximants evaluated with few products.

Every scheme is a *stage plan*: a sequence of nodes

    node = (sum_i l_i N_i) * (sum_j r_j N_j) + sum_k a_k N_k

over previously defined nodes (``I`` and ``A`` to begin with), followed by a
final linear combination. Each node costs exactly one matrix product.

Matrices are carried as pairs ``(c, M)`` meaning ``c*I + M`` with ``M``
vanishing at zero, so the unit constant is only added at the very end.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Callable, Sequence, Union

import mpmath as mp
import numpy as np

from . import _mppoly as mpp
from .linalg import CostLedger, add_identity, mat_mul

Coef = Union[str, int, Fraction]
Lin = tuple[tuple[Coef, str], ...]


@dataclass(frozen=True)
class Stage:
    name: str
    left: Lin
    right: Lin
    add: Lin = ()


@dataclass
class TaylorScheme:
    """A polynomial approximant given by a stage plan and its coefficients.

    ``input_scale`` multiplies A before the plan runs (free of cost); it keeps
    derived coefficients of moderate size.
    """
    id: str
    degree: int
    matched_order: int
    stages: tuple[Stage, ...]
    output: Lin
    params: dict[str, mp.mpf] = field(default_factory=dict)
    input_scale: mp.mpf = mp.mpf(1)
    _floats: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def products(self) -> int:
        return len(self.stages)

    @property
    def cost(self) -> Fraction:
        return Fraction(self.products)

    @property
    def stage_coeffs(self) -> list:
        return [self.params[k] for k in sorted(self.params)]

    def float_params(self) -> dict[str, float]:
        if not self._floats:
            self._floats.update({k: float(v) for k, v in self.params.items()})
        return self._floats

    def to_payload(self, digits: int = 40) -> dict:
        return {
            "degree": self.degree,
            "matched_order": self.matched_order,
            "input_scale": mp.nstr(self.input_scale, digits, strip_zeros=False),
            "params": {k: mp.nstr(v, digits, strip_zeros=False) for k, v in sorted(self.params.items())},
        }


# --------------------------------------------------------------------------
# generic plan execution

def _coef_value(c: Coef, params, conv):
    if isinstance(c, str):
        return params[c]
    return conv(c)


def run_plan(stages: Sequence[Stage], output: Lin, params, x, one, *,
             lin: Callable, mul: Callable, conv: Callable = lambda c: c):
    """Execute a plan over an arbitrary algebra given `lin` (linear
    combination of (coefficient, value) pairs) and `mul`."""
    env = {"I": one, "A": x}

    def combo(terms):
        return lin([(_coef_value(c, params, conv), env[n]) for c, n in terms])

    for st in stages:
        if st.name in env:
            raise ValueError(f"node {st.name!r} defined twice")
        prod = mul(combo(st.left), combo(st.right))
        env[st.name] = lin([(1, prod)] + [(_coef_value(c, params, conv), env[n]) for c, n in st.add])
    return combo(output)


def _check_plan(stages, output):
    known = {"I", "A"}
    for st in stages:
        for _, n in (*st.left, *st.right, *st.add):
            if n not in known:
                raise ValueError(f"stage {st.name!r} uses undefined node {n!r}")
        known.add(st.name)
    for _, n in output:
        if n not in known:
            raise ValueError(f"output uses undefined node {n!r}")


# matrices, as (constant, zero-constant part) pairs

def _mat_lin(terms):
    c = 0.0
    m = None
    for coef, (ci, mi) in terms:
        if coef == 0:
            continue
        c += coef * ci
        m = coef * mi if m is None else m + coef * mi
    return c, m


def eval_taylor(scheme: TaylorScheme, a: np.ndarray, ledger: CostLedger | None = None) -> np.ndarray:
    """Evaluate `scheme` at the square matrix `a`; one ledger product per stage."""
    if ledger is None:
        ledger = CostLedger()
    x = a * float(scheme.input_scale) if scheme.input_scale != 1 else a
    zero = np.zeros_like(x)

    def lin(terms):
        c, m = _mat_lin(terms)
        return c, (zero if m is None else m)

    def mul(u, v):
        (c1, m1), (c2, m2) = u, v
        return c1 * c2, c1 * m2 + c2 * m1 + mat_mul(m1, m2, ledger)

    _, m = run_plan(scheme.stages, scheme.output, scheme.float_params(), (0.0, x), (1.0, zero),
                    lin=lin, mul=mul, conv=float)
    # the constant term is 1 by the order conditions; the rounded plan constant is dropped
    return add_identity(m, 1.0)


def scheme_series(scheme: TaylorScheme, params=None) -> list:
    """Exact polynomial coefficients (ascending, mpmath) of `scheme`."""
    params = scheme.params if params is None else params
    deg = scheme.degree

    def lin(terms):
        out = [mp.mpf(0)] * (deg + 1)
        for coef, p in terms:
            for i, v in enumerate(p[:deg + 1]):
                out[i] += coef * v
        return out

    def mul(u, v):
        return mpp.mul(u, v)[:deg + 1]

    conv = mpp.to_mpf
    x = [mp.mpf(0), mp.mpf(1)] + [mp.mpf(0)] * (deg - 1)
    one = [mp.mpf(1)] + [mp.mpf(0)] * deg
    coeffs = run_plan(scheme.stages, scheme.output, params, x, one, lin=lin, mul=mul, conv=conv)
    s = mp.mpf(scheme.input_scale)
    return [c * s ** n for n, c in enumerate(coeffs)]


def horner_taylor(m: int, a: np.ndarray, ledger: CostLedger | None = None) -> np.ndarray:
    """Degree-m Taylor polynomial by nested Horner, m - 1 products."""
    if m < 0:
        raise ValueError("degree must be non-negative")
    n = a.shape[0]
    if m == 0:
        return np.eye(n, dtype=a.dtype)
    t = add_identity(a / m, 1.0)
    for j in range(m - 1, 0, -1):
        t = add_identity(mat_mul(a, t, ledger) / j, 1.0)
    return t


def paterson_stockmeyer(coeffs: Sequence[float], a: np.ndarray, ledger: CostLedger | None = None) -> np.ndarray:
    """Evaluate sum coeffs[j] A^j by Paterson-Stockmeyer with block size ceil(sqrt(deg))."""
    deg = len(coeffs) - 1
    n = a.shape[0]
    eye = np.eye(n, dtype=np.result_type(a, float))
    if deg <= 1:
        return coeffs[0] * eye + (coeffs[1] * a if deg == 1 else 0)
    s = int(np.ceil(np.sqrt(deg)))
    pw = [eye, a]
    for _ in range(2, s + 1):
        pw.append(mat_mul(pw[-1], a, ledger))
    blocks = [coeffs[i:i + s] for i in range(0, deg + 1, s)]
    out = None
    for blk in reversed(blocks):
        b = sum(c * pw[i] for i, c in enumerate(blk))
        out = b if out is None else mat_mul(out, pw[s], ledger) + b
    return out


def paterson_stockmeyer_products(deg: int) -> int:
    if deg <= 1:
        return 0
    s = int(np.ceil(np.sqrt(deg)))
    nblocks = deg // s + 1
    return (s - 1) + (nblocks - 1)


# --------------------------------------------------------------------------
# templates

def _L(*terms) -> Lin:
    return tuple(terms)


def _powers_plan(*names: str) -> tuple[Stage, ...]:
    """A2 = A A, A3 = A2 A; only the requested ones."""
    out = []
    if "A2" in names:
        out.append(Stage("A2", _L((1, "A")), _L((1, "A"))))
    if "A3" in names:
        out.append(Stage("A3", _L((1, "A2")), _L((1, "A"))))
    return tuple(out)


def _t2() -> TaylorScheme:
    st = _powers_plan("A2")
    return TaylorScheme("t2", 2, 2, st, _L((1, "I"), (1, "A"), (Fraction(1, 2), "A2")))


def _t4() -> TaylorScheme:
    st = _powers_plan("A2") + (
        Stage("T", _L((1, "A2")), _L((Fraction(1, 2), "I"), (Fraction(1, 6), "A"), (Fraction(1, 24), "A2")),
              _L((1, "I"), (1, "A"))),)
    return TaylorScheme("t4", 4, 4, st, _L((1, "T")))


def _t8_template():
    st = _powers_plan("A2") + (
        Stage("A4", _L((1, "A2")), _L(("x1", "A"), ("x2", "A2"))),
        Stage("A8", _L(("x3", "A2"), (1, "A4")), _L(("x4", "I"), ("x5", "A"), ("x6", "A2"), ("x7", "A4"))),
    )
    return st, _L(("y0", "I"), ("y1", "A"), ("y2", "A2"), (1, "A8"))


def t8_params(dps: int | None = None) -> dict:
    """Closed-form coefficients of the 3-product degree-8 Taylor scheme."""
    with mp.workdps(dps or max(60, mp.mp.dps + 10)):
        r = mp.sqrt(177)
        x3 = mp.mpf(2) / 3
        return {
            "x1": x3 * (1 + r) / 88,
            "x2": (1 + r) / 352 * x3,
            "x3": x3,
            "x4": (-271 + 29 * r) / (315 * x3),
            "x5": 11 * (-1 + r) / (1260 * x3),
            "x6": 11 * (-9 + r) / (5040 * x3),
            "x7": (89 - r) / (5040 * x3 ** 2),
            "y0": mp.mpf(1),
            "y1": mp.mpf(1),
            "y2": (857 - 58 * r) / 630,
        }


def _poly3(prefix: str, idx, with_a6: bool = False) -> Lin:
    terms = [(f"{prefix}0{idx}", "I"), (f"{prefix}1{idx}", "A"), (f"{prefix}2{idx}", "A2"), (f"{prefix}3{idx}", "A3")]
    if with_a6:
        terms.append((f"{prefix}6{idx}", "A6"))
    return tuple(terms)


def _t12_template():
    b = {i: _poly3("a", i) for i in range(1, 5)}
    st = _powers_plan("A2", "A3") + (
        Stage("A6", b[4], b[4], b[3]),
        Stage("T", b[2] + ((1, "A6"),), _L((1, "A6")), b[1]),
    )
    return st, _L((1, "T"))


def _t18_template():
    b1 = _poly3("a", 1)
    b = {i: _poly3("b", i, with_a6=True) for i in range(2, 6)}
    st = _powers_plan("A2", "A3") + (
        Stage("A6", _L((1, "A3")), _L((1, "A3"))),
        Stage("A9", b1, b[5], b[4]),
        Stage("T", b[3] + ((1, "A9"),), _L((1, "A9")), b[2]),
    )
    return st, _L((1, "T"))


def _y22_template():
    st = _powers_plan("A2") + (
        Stage("y0", _L((1, "A2")), _L(("c1", "A2"), ("c2", "A"))),
        Stage("y1", _L((1, "y0"), ("c3", "A2"), ("c4", "A")), _L((1, "y0"), ("c5", "A2")),
              _L(("c6", "y0"), ("c7", "A2"))),
        Stage("y2", _L((1, "y1"), ("c8", "A2"), ("c9", "A")), _L((1, "y1"), ("c10", "y0"), ("c11", "A")),
              _L(("c12", "y1"), ("c13", "y0"), ("c14", "A2"), ("c15", "A"), ("c16", "I"))),
    )
    return st, _L((1, "y2"))


def _y23_template():
    st = _powers_plan("A2", "A3") + (
        Stage("y0", _L((1, "A3")), _L(("c1", "A3"), ("c2", "A2"), ("c3", "A"))),
        Stage("y1", _L((1, "y0"), ("c4", "A3"), ("c5", "A2"), ("c6", "A")),
              _L((1, "y0"), ("c7", "A3"), ("c8", "A2")),
              _L(("c9", "y0"), ("c10", "A3"), ("c11", "A2"))),
        Stage("y2", _L((1, "y1"), ("c12", "A3"), ("c13", "A2"), ("c14", "A")),
              _L((1, "y1"), ("c15", "y0"), ("c16", "A")),
              _L(("c17", "y1"), ("c18", "y0"), ("c19", "A3"), ("c20", "A2"), ("c21", "A"), ("c22", "I"))),
    )
    return st, _L((1, "y2"))


# Starting points for the matching equations. Entries listed under "fixed"
# are free parameters of the template held at these values; the rest are
# refined by Newton's method.
SEEDS = {
    "t8": dict(
        template=_t8_template, degree=8, order=8, scale="1", fixed={"x3": "2/3"},
        start={"x1": "0.1083", "x2": "0.0271", "x4": "0.2117", "x5": "0.1129", "x6": "0.0198",
               "x7": "0.0039", "y0": "1", "y1": "1", "y2": "0.1367"}),
    "t12": dict(
        template=_t12_template, degree=12, order=12, scale="1",
        fixed={"a02": "4.6", "a32": "0.0017299", "a04": "0"},
        start={
            "a01": "-0.0186023205146205532243437300433", "a03": "0.211693118299809442949323323336",
            "a11": "-0.00500702322573317730979741843919", "a12": "0.992875103538486836140479571505",
            "a13": "0.158224384715726725371768893252", "a14": "-0.131810610138301840156819349464",
            "a21": "-0.573420122960522263905952420789", "a22": "-0.132445561052799638845074997454",
            "a23": "0.165635169436727415011171668419", "a24": "-0.0202785554058925907933568229945",
            "a31": "-0.133399693943892059700768926983", "a33": "0.0107862779315792425026320640108",
            "a34": "-0.00675951846863086359778560766482",
        }),
    "t18": dict(
        template=_t18_template, degree=18, order=18, scale="1",
        fixed={"a01": "0", "a11": "-0.10036558103014462001", "b02": "0", "b05": "0", "b15": "0"},
        start={
            "a21": "-0.00802924648241156960", "a31": "-0.00089213849804572995",
            "b12": "0.39784974949964507614", "b22": "1.36783778460411719922",
            "b32": "0.49828962252538267755", "b62": "-0.00063789819459472330",
            "b03": "-10.9676396052962062593", "b13": "1.68015813878906197182",
            "b23": "0.05717798464788655127", "b33": "-0.00698210122488052084",
            "b63": "0.00003349750170860705",
            "b04": "-0.09043168323908105619", "b14": "-0.06764045190713819075",
            "b24": "0.06759613017704596460", "b34": "0.02955525704293155274",
            "b64": "-0.00001391802575160607",
            "b25": "-0.09233646193671185927", "b35": "-0.01693649390020817171",
            "b65": "-0.00001400867981820361",
        }),
    "t15^[16]": dict(
        template=_y22_template, degree=16, order=15, scale="1", fixed={},
        start=dict(zip([f"c{i}" for i in range(1, 17)], [
            "0.0004018761610201036", "0.002945531440279681", "-0.008709066576837624", "0.4017568440673561",
            "0.03230762888122311", "-0.023373194047110975", "0.26149279772981165", "-0.23810703738709857",
            "-0.04130276365929829", "5.792361707073265", "2.224209172496372", "10.408017352313554",
            "-3.0301234007387086", "-2.129755590496437", "1.0", "1.0"]))),
    # coefficients below act on A/6
    "t21^[24]": dict(
        template=_y23_template, degree=24, order=21, scale="1/6", fixed={},
        start=dict(zip([f"c{i}" for i in range(1, 23)], [
            "-0.05419835457986033", "-0.034998630902919776", "-0.06965622608836806", "-0.43316725909526593",
            "-2.510765377035993", "-5.651167928883809", "-0.6162394707462931", "0.2716141375291217",
            "-1.8297735045003747", "6.806986657073999", "5.012096917571276", "-0.49012586811422026",
            "-1.9418755848719205", "1.8673297367894033", "-9.34385126193812", "4.119423813397639",
            "3.2333701630855463", "5.726379787259866", "-3.053268214509409", "-5.8982872129638135",
            "6.0", "1.0"]))),
}


def _parse(s: str) -> mp.mpf:
    if "/" in s:
        num, den = s.split("/")
        return mp.mpf(num) / mp.mpf(den)
    return mp.mpf(s)


DERIVABLE = {(8, 3): "t8", (12, 4): "t12", (18, 5): "t18", (16, 4): "t15^[16]", (24, 5): "t21^[24]"}


def derive_taylor_scheme(degree: int, products: int, template: str | None = None, dps: int = 80,
                         tol_digits: int = 60, maxiter: int = 40) -> TaylorScheme:
    """Solve the matching equations of a product template by Newton's method.

    The unknowns make the scalar expansion agree with 1/n! for n up to the
    matched order. `template` overrides the id picked from (degree, products).
    Raises ArithmeticError with the residual if Newton does not converge.
    """
    ident = template or DERIVABLE.get((degree, products))
    if ident not in SEEDS:
        raise ValueError(f"no template for degree {degree} with {products} products")
    entry = SEEDS[ident]
    stages, output = entry["template"]()
    _check_plan(stages, output)
    with mp.workdps(dps):
        scale = _parse(entry["scale"])
        fixed = {k: _parse(v) for k, v in entry["fixed"].items()}
        names = sorted(entry["start"])
        x = mp.matrix([_parse(entry["start"][k]) for k in names])
        if len(names) != entry["order"] + 1:
            raise ValueError(f"{ident}: {len(names)} unknowns for {entry['order'] + 1} equations")
        proto = TaylorScheme(ident, entry["degree"], entry["order"], stages, output, input_scale=scale)
        # equations in the scaled variable keep the residuals balanced
        target = [scale ** -n / mp.factorial(n) for n in range(entry["order"] + 1)]

        def resid(vec):
            params = dict(fixed)
            params.update(zip(names, vec))
            c = scheme_series(TaylorScheme(ident, entry["degree"], entry["order"], stages, output), params)
            return mp.matrix([(c[n] - target[n]) / target[n] for n in range(len(target))])

        eps = mp.mpf(10) ** (-dps // 2)
        for _ in range(maxiter):
            f0 = resid(x)
            res = mp.norm(f0, mp.inf)
            if res < mp.mpf(10) ** (-tol_digits):
                break
            jac = mp.matrix(len(f0), len(x))
            for j in range(len(x)):
                xp = x.copy()
                h = eps * max(1, abs(x[j]))
                xp[j] += h
                col = (resid(xp) - f0) / h
                for i in range(len(f0)):
                    jac[i, j] = col[i]
            x = x - mp.lu_solve(jac, f0)
        else:
            raise ArithmeticError(f"{ident}: Newton did not converge, residual {mp.nstr(res, 5)}")
        params = dict(fixed)
        params.update(zip(names, x))
        proto.params = params
    return proto


def build_taylor_scheme(ident: str, params: dict | None = None, input_scale=None) -> TaylorScheme:
    """Assemble scheme `ident`; derived templates need `params` (see `derive_taylor_scheme`)."""
    if ident == "t2":
        return _t2()
    if ident == "t4":
        return _t4()
    if ident == "t8":
        st, out = _t8_template()
        prm = t8_params() if params is None else _parse_params(params)
        return TaylorScheme("t8", 8, 8, st, out, prm)
    if ident not in SEEDS:
        raise KeyError(f"unknown Taylor scheme {ident!r}")
    if params is None:
        raise ValueError(f"{ident} needs coefficients")
    entry = SEEDS[ident]
    st, out = entry["template"]()
    _check_plan(st, out)
    with mp.workdps(max(60, mp.mp.dps)):
        scale = _parse(entry["scale"] if input_scale is None else str(input_scale))
    return TaylorScheme(ident, entry["degree"], entry["order"], st, out, _parse_params(params), scale)


def _parse_params(params: dict) -> dict:
    """Decimal strings are read at (at least) 60 digits."""
    with mp.workdps(max(60, mp.mp.dps)):
        return {k: v if isinstance(v, mp.mpf) else mp.mpf(v) for k, v in params.items()}


def taylor_series_error(scheme: TaylorScheme) -> mp.mpf:
    """Largest relative deviation from 1/n! over the matched orders."""
    c = scheme_series(scheme)
    return max(abs(c[n] * factorial(n) - 1) for n in range(scheme.matched_order + 1))


TAYLOR_IDS = ("t2", "t4", "t8", "t12", "t15^[16]", "t18", "t21^[24]")
