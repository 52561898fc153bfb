"""Method catalog, descriptors and the shipped method-data file.

The data file is JSON holding, for every catalogued method, its family,
exact cost, coefficient payload, registry membership, flags and the theta
grid. A SHA-256 digest over the canonical serialization guards it.
"""
from __future__ import annotations

import enum
import hashlib
import json
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from math import factorial
from pathlib import Path
from typing import Callable

import mpmath as mp
import numpy as np

from . import backward_error as be
from .linalg import CostLedger
from .pade import (DIAGONAL_MONOLITHIC, FRACTION_SHAPES, FractionScheme, build_fraction_scheme,
                   eval_diagonal_pade, eval_fraction_scheme, pade_poly_coeffs, pade_scalar)
from .taylor import (TaylorScheme, build_taylor_scheme, derive_taylor_scheme, eval_taylor,
                     paterson_stockmeyer, paterson_stockmeyer_products, scheme_series, SEEDS)

FORMAT_VERSION = 1
DATA_FILE = "methods.json"


class DataFileError(RuntimeError):
    """The method-data file is missing, corrupt or fails validation."""


class Family(str, enum.Enum):
    TAYLOR = "taylor"
    SUPERDIAGONAL = "superdiagonal-pade"
    DIAGONAL = "diagonal-pade"


class ExpmMode(str, enum.Enum):
    GENERAL = "general"
    INVERSE_FREE = "inverse-free"
    DIAGONAL_PADE = "diagonal-pade"


REGISTRY_IDS = {
    ExpmMode.GENERAL: ("t2", "r2,1", "t4", "r4,2", "t8", "r6,3", "r6,4", "t12", "t15^[16]", "r8,4",
                       "r8,5", "t18", "t21^[24]", "r12,8", "r13,13"),
    ExpmMode.INVERSE_FREE: ("t2", "t4", "t8", "t12", "t15^[16]", "t18", "t21^[24]"),
    ExpmMode.DIAGONAL_PADE: ("r1,1", "r2,2", "r3,3", "r4,4", "r5,5", "r6,6", "r7,7", "r8,8",
                             "r9,9", "r13,13"),
}

# Rows of the comparison tables that never enter a registry.
TABLE_ONLY_IDS = ("t15", "t21", "r10,5", "r16,12", "r10,10", "r11,11", "r12,12",
                  "r14,14", "r15,15", "r16,16", "r17,17", "r18,18")

ROUNDOFF_LIMITED = {"r12,8": "1e-12", "t21^[24]": "1e-12"}

_DIAG_PRODUCTS = {1: 0, 2: 1, 3: 2, 5: 3, 7: 4, 9: 5, 13: 6}


def catalog_ids() -> list[str]:
    out = []
    for ids in REGISTRY_IDS.values():
        out += [i for i in ids if i not in out]
    return out + [i for i in TABLE_ONLY_IDS if i not in out]


def parse_id(ident: str):
    """('t', degree, matched) or ('r', k, m)."""
    if ident.startswith("t"):
        if "^[" in ident:
            order, deg = ident[1:].split("^[")
            return "t", int(deg.rstrip("]")), int(order)
        return "t", int(ident[1:]), int(ident[1:])
    if ident.startswith("r"):
        k, m = ident[1:].split(",")
        return "r", int(k), int(m)
    raise ValueError(f"unknown method id {ident!r}")


@dataclass
class MethodDescriptor:
    id: str
    family: Family
    order: int
    cost: Fraction | None
    kind: str  # taylor | fraction | diagonal | ps | table
    impl: object = None
    roundoff_limited_below: float | None = None
    theta: dict = field(default_factory=dict)

    @property
    def inverse_free(self) -> bool:
        return self.family is Family.TAYLOR

    @property
    def structure_preserving(self) -> bool:
        return self.family is Family.DIAGONAL

    def eligible(self, grid_tol: float) -> bool:
        return self.roundoff_limited_below is None or grid_tol >= self.roundoff_limited_below

    def evaluate(self, a: np.ndarray, ledger: CostLedger | None = None) -> np.ndarray:
        if self.kind == "taylor":
            return eval_taylor(self.impl, a, ledger)
        if self.kind == "fraction":
            return eval_fraction_scheme(self.impl, a, ledger)
        if self.kind == "diagonal":
            return eval_diagonal_pade(self.impl, a, ledger)
        if self.kind == "ps":
            return paterson_stockmeyer(self.impl, a, ledger)
        raise NotImplementedError(f"{self.id} has no evaluator")

    def scalar_form(self) -> be.ScalarForm:
        """Exact (or working-precision) scalar rational form."""
        tag, a, b = parse_id(self.id)
        if tag == "r":
            pc = pade_poly_coeffs(a, b)
            return be.ScalarForm(pc.p, pc.q)
        if self.kind == "taylor" and self.impl.matched_order != self.impl.degree:
            return be.ScalarForm(tuple(scheme_series(self.impl)))
        return be.ScalarForm(tuple(Fraction(1, factorial(n)) for n in range(a + 1)))

    def __repr__(self):
        return f"MethodDescriptor({self.id!r}, cost={self.cost})"


def _family(ident: str) -> Family:
    tag, a, b = parse_id(ident)
    if tag == "t":
        return Family.TAYLOR
    return Family.DIAGONAL if a == b else Family.SUPERDIAGONAL


def _kind(ident: str) -> str:
    tag, a, b = parse_id(ident)
    if tag == "t":
        return "taylor" if ident in ("t2", "t4", "t8") or ident in SEEDS else "ps"
    if (a, b) in FRACTION_SHAPES:
        return "fraction"
    if a == b and a in DIAGONAL_MONOLITHIC:
        return "diagonal"
    return "table"


def _order(ident: str) -> int:
    tag, a, b = parse_id(ident)
    return b if tag == "t" else a + b


# --------------------------------------------------------------------------
# building

def _make_impl(ident: str, dps: int):
    kind = _kind(ident)
    tag, a, b = parse_id(ident)
    if kind == "taylor":
        if ident in ("t2", "t4", "t8"):
            return build_taylor_scheme(ident)
        return derive_taylor_scheme(0, 0, template=ident, dps=max(dps, 80), tol_digits=max(dps, 80) - 20)
    if kind == "fraction":
        return build_fraction_scheme(a, b)
    if kind == "diagonal":
        return a
    if kind == "ps":
        return [1.0 / factorial(n) for n in range(a + 1)]
    return None


def _cost_of(kind: str, impl) -> Fraction | None:
    if kind == "taylor":
        return Fraction(impl.products)
    if kind == "fraction":
        return impl.cost
    if kind == "diagonal":
        return _DIAG_PRODUCTS[impl] + Fraction(4, 3)
    if kind == "ps":
        return Fraction(paterson_stockmeyer_products(len(impl) - 1))
    return None


def _payload(kind: str, impl):
    if kind in ("taylor", "fraction"):
        return impl.to_payload()
    return None


def build_method_data(precision: int = be.WORK_DPS, grid=be.EXTENDED_GRID,
                      progress: Callable[[str], None] | None = None) -> dict:
    """Regenerate every payload and theta cell; returns the file content."""
    methods = []
    modes = {i: [m.value for m, ids in REGISTRY_IDS.items() if i in ids] for i in catalog_ids()}
    for ident in catalog_ids():
        if progress:
            progress(ident)
        kind = _kind(ident)
        with mp.workdps(precision):
            impl = _make_impl(ident, precision)
            desc = MethodDescriptor(ident, _family(ident), _order(ident), _cost_of(kind, impl), kind, impl)
            table = be.build_theta_table([(ident, desc)], grid, dps=precision)
        cost = desc.cost
        methods.append({
            "id": ident,
            "family": desc.family.value,
            "order": desc.order,
            "kind": kind,
            "cost": None if cost is None else str(cost),
            "modes": modes[ident],
            "roundoff_limited_below": ROUNDOFF_LIMITED.get(ident),
            "payload": _payload(kind, impl),
            "theta": {label: repr(table.theta(ident, label)) for label in grid},
            "theta_capped": sorted(label for (_, label) in table.capped),
        })
    content = {"format_version": FORMAT_VERSION, "precision": precision, "grid": list(grid), "methods": methods}
    content["digest"] = _digest(content)
    return content


def _digest(content: dict) -> str:
    body = {k: v for k, v in content.items() if k != "digest"}
    blob = json.dumps(body, sort_keys=True, separators=(",", ":")).encode()
    return "sha256:" + hashlib.sha256(blob).hexdigest()


def dumps(content: dict) -> str:
    return json.dumps(content, sort_keys=True, indent=1) + "\n"


def shipped_data_path() -> Path:
    return Path(str(resources.files("tolexpm") / "data" / DATA_FILE))


# --------------------------------------------------------------------------
# loading and validation

def read_method_data(path: str | Path | None = None) -> dict:
    path = Path(path) if path is not None else shipped_data_path()
    try:
        content = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise DataFileError(f"method-data file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise DataFileError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(content, dict):
        raise DataFileError(f"{path}: top level must be an object")
    if content.get("format_version") != FORMAT_VERSION:
        raise DataFileError(f"{path}: unsupported format_version {content.get('format_version')!r}")
    if content.get("digest") != _digest(content):
        raise DataFileError(f"{path}: digest mismatch, file was modified or corrupted")
    return content


def _check_taylor(scheme: TaylorScheme) -> float:
    with mp.workdps(50):
        c = scheme_series(scheme)
        return float(max(abs(c[n] * factorial(n) - 1) for n in range(scheme.matched_order + 1)))


def _check_fraction(scheme: FractionScheme) -> float:
    worst = 0.0
    with mp.workdps(30):
        for x in (-1.5, -0.5, 0.25, 1.0, 2.0):
            ref = pade_scalar(scheme.k, scheme.m, mp.mpf(x))
            worst = max(worst, float(abs(scheme.scalar(mp.mpf(x)) / ref - 1)))
    return worst


def _descriptor_from_entry(entry: dict, grid) -> MethodDescriptor:
    ident = entry["id"]
    kind = entry["kind"]
    if kind != _kind(ident) or entry["family"] != _family(ident).value:
        raise DataFileError(f"{ident}: kind/family do not match the catalog")
    tag, a, b = parse_id(ident)
    payload = entry.get("payload")
    if kind == "taylor":
        if ident in ("t2", "t4"):
            impl = build_taylor_scheme(ident)
        else:
            if not payload:
                raise DataFileError(f"{ident}: missing coefficient payload")
            impl = build_taylor_scheme(ident, payload["params"], payload["input_scale"])
            err = _check_taylor(impl)
            if err > 1e-14:
                warnings.warn(f"{ident}: shipped coefficients fail the Taylor check ({err:.2e}); "
                              "falling back to Paterson-Stockmeyer", RuntimeWarning, stacklevel=3)
                kind, impl = "ps", [1.0 / factorial(n) for n in range(impl.degree + 1)]
    elif kind == "fraction":
        if not payload:
            raise DataFileError(f"{ident}: missing coefficient payload")
        impl = FractionScheme.from_payload(ident, payload)
        err = _check_fraction(impl)
        if err > 1e-13:
            raise DataFileError(f"{ident}: fraction payload violates the scalar identity ({err:.2e})")
    elif kind == "diagonal":
        impl = a
    elif kind == "ps":
        impl = [1.0 / factorial(n) for n in range(a + 1)]
    else:
        impl = None
    cost = _cost_of(kind, impl)
    if kind == entry["kind"] and entry["cost"] is not None and Fraction(entry["cost"]) != cost:
        raise DataFileError(f"{ident}: recorded cost {entry['cost']} differs from the scheme's {cost}")
    theta = {}
    for label in grid:
        try:
            theta[label] = float(entry["theta"][label])
        except (KeyError, ValueError) as exc:
            raise DataFileError(f"{ident}: bad theta entry for {label}") from exc
    dec = [theta[l] for l in be.DECIMAL_GRID if l in theta]
    if any(t <= 0 for t in dec) or any(x > y for x, y in zip(dec[1:], dec)):
        raise DataFileError(f"{ident}: theta not positive and monotone over the tolerance grid")
    limit = entry.get("roundoff_limited_below")
    return MethodDescriptor(ident, _family(ident), _order(ident), cost, kind, impl,
                            None if limit is None else float(limit), theta)


@dataclass
class MethodData:
    grid: tuple
    precision: int
    methods: dict[str, MethodDescriptor]
    modes: dict[str, list[str]]

    def registry(self, mode: ExpmMode) -> list[MethodDescriptor]:
        mode = ExpmMode(mode)
        out = [self.methods[i] for i in self.modes[mode.value]]
        return sorted(out, key=lambda d: (d.cost, d.order, d.id))

    def theta_table(self) -> be.ThetaTable:
        t = be.ThetaTable(self.grid)
        for mid, d in self.methods.items():
            for label, v in d.theta.items():
                t.entries[(mid, label)] = v
        return t


def load_method_data(path: str | Path | None = None) -> MethodData:
    content = read_method_data(path)
    grid = tuple(content["grid"])
    missing = [l for l in be.DECIMAL_GRID if l not in grid]
    if missing:
        raise DataFileError(f"tolerance grid lacks {missing}")
    methods, modes = {}, {m.value: [] for m in ExpmMode}
    for entry in content["methods"]:
        d = _descriptor_from_entry(entry, grid)
        methods[d.id] = d
        for m in entry["modes"]:
            if m not in modes:
                raise DataFileError(f"{d.id}: unknown mode {m!r}")
            modes[m].append(d.id)
    for m, ids in modes.items():
        if not ids:
            raise DataFileError(f"registry for mode {m!r} is empty")
        for i in ids:
            if methods[i].kind == "table":
                raise DataFileError(f"{i} is in registry {m!r} but has no evaluator")
    if any(methods[i].family is not Family.TAYLOR for i in modes[ExpmMode.INVERSE_FREE.value]):
        raise DataFileError("inverse-free registry contains a method with solves")
    if any(methods[i].family is not Family.DIAGONAL for i in modes[ExpmMode.DIAGONAL_PADE.value]):
        raise DataFileError("diagonal-pade registry contains a non-diagonal method")
    return MethodData(grid, content["precision"], methods, modes)


@lru_cache(maxsize=None)
def _shipped() -> MethodData:
    return load_method_data(None)


def default_method_data() -> MethodData:
    return _shipped()
