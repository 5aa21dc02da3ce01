"""Reference closed forms of the n=2 and n=3 objects, transcribed as infix text.

``E1`` stands for ``exp(x1 - x2)`` and ``E1^2`` for ``exp(2 x1 - 2 x2)``.  The
one entry printed with ``exp(x2 - x1)`` is stored with numerator and
denominator multiplied by ``E1``.  Objects that appear only as a scale of
another (``3 sigma``, ``3/2 Lambda``) are stored expanded.

Transcriptions are kept exactly as printed, including entries that disagree
with what the construction produces; the comparisons that expose those
entries live in the tests.

The golden JSON files next to this module are generated from these tables
with ``python -m toda.reference --write DIR``.
"""

from __future__ import annotations

import argparse
import json
import os
from pathlib import Path

from .expr import parse
from .tensors import Matrix, OneForm, SigmaMatrix, VectorField

ETA1_N2 = [
    "2*x3 + 1/2*x4 + t/2*(x3^2 + E1)",
    "x4 - 1/2*x3 + t/2*(x4^2 + E1)",
    "1/2*x3^2 - E1 - t/2*(x3 + x4)*E1",
    "1/2*x4^2 + 2*E1 + t/2*(x3 + x4)*E1",
]

ETA1_N3 = [
    "3*x4 + 1/2*x5 + 1/2*x6 + t/2*(x4^2 + E1)",
    "2*x5 - 1/2*x4 + 1/2*x6 + t/2*(x5^2 + E1 + E2)",
    "x6 - 1/2*x4 - 1/2*x5 + t/2*(x6^2 + E2)",
    "1/2*x4^2 - 2*E1 - t/2*(x4 + x5)*E1",
    "1/2*x5^2 + 3*E1 - E2 + t/2*(x4 + x5)*E1 - t/2*(x5 + x6)*E2",
    "1/2*x6^2 + 2*E2 + t/2*(x5 + x6)*E2",
]

L0 = ["x3 - t*E1", "x4 + t*E1", "1 - t*x3", "3 - t*x4"]

SIGMA0 = [
    ["0", "0", "1", "0"],
    ["0", "0", "0", "1"],
    ["-1", "0", "0", "0"],
    ["0", "-1", "0", "0"],
]

H0 = "1/2*x3^2 + 1/2*x4^2 + E1"

L1 = [
    "1/2*(x3^2 + E1*(8 - t*(x3 + x4)))",
    "1/2*(x4^2 + E1*(-6 + t*(x3 + x4)))",
    "1/2*(-t*E1 + 6*x3 - t*x3^2 - x4)",
    "1/2*(-t*E1 + x3 + 8*x4 - t*x4^2)",
]

SIGMA1 = [
    ["0", "-E1", "x3", "0"],
    ["E1", "0", "0", "x4"],
    ["-x3", "0", "0", "-1"],
    ["0", "-x4", "1", "0"],
]

LAMBDA1 = [
    ["x3", "0", "0", "E1"],
    ["0", "x4", "-E1", "0"],
    ["0", "-1", "x3", "0"],
    ["1", "0", "0", "x4"],
]

H1 = "1/3*(x3^3 + x4^3) + (x3 + x4)*E1"

L2 = [
    "1/2*(-t*E1^2 + x3^3 - E1*(t*x3^2 + x4*(-13 + t*x4) + x3*(-14 + t*x4)))",
    "1/2*(t*E1^2 + x4^3 + E1*(t*x3^2 + x3*(-11 + t*x4) + x4*(-10 + t*x4)))",
    "1/2*(-x3^2*(-11 + t*x3) + x3*x4 + x4^2 + E1*(11 - t*(2*x3 + x4)))",
    "1/2*(x3^2 + x3*x4 + x4^2*(13 - t*x4) + E1*(13 - t*(x3 + 2*x4)))",
]

SIGMA2 = [
    ["0", "-3/2*E1*(x3 + x4)", "3/2*(x3^2 + E1)", "0"],
    ["3/2*E1*(x3 + x4)", "0", "0", "3/2*(x4^2 + E1)"],
    ["-3/2*(x3^2 + E1)", "0", "0", "-3/2*(x3 + x4)"],
    ["0", "-3/2*(x4^2 + E1)", "3/2*(x3 + x4)", "0"],
]

LAMBDA2 = [[f"3/2*({v})" for v in row] for row in LAMBDA1]

H2 = "3/4*E1^2 + 3/2*E1*(x3^2 + x3*x4 + x4^2) + 3/8*(x3^4 + x4^4)"

L3 = [
    "3/4*(x3^4 - 2*E1^2*(t*(x3 + x4) - 9)"
    " - E1*(t*x3^3 + x3^2*(-20 + t*x4) + x3*x4*(t*x4 - 19) + x4^2*(t*x4 - 18)))",
    "3/4*(x4^4 + 2*E1^2*(t*(x3 + x4) - 8)"
    " + E1*(t*x3^3 + x3^2*(t*x4 - 16) + x3*x4*(t*x4 - 15) + x4^2*(t*x4 - 14)))",
    "3/4*(-E1^2*t - (x3^3*(t*x3 - 16) + x3^2*x4 + x3*x4^2 + x4^3)"
    " - E1*(3*t*x3^2 + 2*x3*(t*x4 - 16) + x4*(t*x4 - 15)))",
    "3/4*(-E1^2*t + x3^3 + x3^2*x4 + x3*x4^2 + x4^3*(18 - t*x4)"
    " - E1*(t*x3^2 + 3*x4*(t*x4 - 12) + x3*(2*t*x4 - 19)))",
]

H3 = "3*(x3 + x4)*E1^2 + 3*E1*(x3 + x4)*(x3^2 + x4^2) + 3/5*(x3^5 + x4^5)"

# downward hierarchy
LP1 = [
    "3/2*(x3^2 + E1*(9 - t*(x3 + x4)))",
    "3/2*(x4^2 + E1*(-7 + t*(x3 + x4)))",
    "3/2*(-t*E1 - x3*(-7 + t*x3) + x4)",
    "3/2*(-t*E1 + x3 + x4*(9 - t*x4))",
]

LP0 = ["3*(x3 - t*E1)", "3*(x4 + t*E1)", "3*(3 - t*x3)", "3*(5 - t*x4)"]

SIGMA_M1 = [
    ["0", "E1/(x3*x4 - E1)", "x4/(x3*x4 - E1)", "0"],
    ["-E1/(x3*x4 - E1)", "0", "0", "x3/(x3*x4 - E1)"],
    ["-x4/(x3*x4 - E1)", "0", "0", "1/(x3*x4 - E1)"],
    ["0", "-x3/(x3*x4 - E1)", "-1/(x3*x4 - E1)", "0"],
]

SIGMA_M1_F = ["0", "0", "-1", "-1"]

H_M1 = "x3 + x4"

L_M1 = [
    "x3*x4/(x3*x4 - E1)",
    "x3*x4/(x3*x4 - E1)",
    "x4/(x3*x4 - E1)",
    "x3/(-x3*x4 + E1)",
]

# momentum hierarchy, n = 2
ETA5_L1 = ["2*(x3 + x4)", "2*(x3 + x4)", "-2*t*(x3 + x4) + 4", "-2*t*(x3 + x4) + 4"]
ETA5_H1 = "(x3 + x4)^2"
ETA5_L2 = ["8*(x3 + x4)", "8*(x3 + x4)", "-8*t*(x3 + x4) + 8", "-8*t*(x3 + x4) + 8"]
ETA5_H2 = "4*(x3 + x4)^2"


def _vec(rows, n):
    return [parse(s, n) for s in rows]


def vector(rows, n: int = 2) -> VectorField:
    return VectorField(_vec(rows, n), n)


def one_form(rows, n: int = 2) -> OneForm:
    return OneForm(_vec(rows, n), n)


def matrix(rows, n: int = 2, cls=Matrix):
    return cls([[parse(s, n) for s in r] for r in rows], n)


def sigma(rows, n: int = 2) -> SigmaMatrix:
    return matrix(rows, n, SigmaMatrix)


def scalar(text, n: int = 2):
    return parse(text, n)


def _level(k, l=None, sig=None, lam=None, H=None, n=2, **extra):
    def texts(rows):
        return None if rows is None else [parse(s, n).to_text() for s in rows]

    def mat(rows):
        return None if rows is None else [texts(r) for r in rows]

    out = {"n": n, "k": k, "l": texts(l), "l0": None, "sigma": mat(sig), "lambda": mat(lam),
           "H": None if H is None else parse(H, n).to_text()}
    for key, val in extra.items():
        out[key] = texts(val) if isinstance(val, list) else val
    return out


def golden_documents() -> dict[str, dict]:
    """File name to JSON document for every transcribed object."""
    return {
        "eta1_n2.json": {"n": 2, "components": [parse(s, 2).to_text() for s in ETA1_N2]},
        "eta1_n3.json": {"n": 3, "components": [parse(s, 3).to_text() for s in ETA1_N3]},
        "eta1_level0.json": _level(0, L0, SIGMA0, None, H0),
        "eta1_level1.json": _level(1, L1, SIGMA1, LAMBDA1, H1),
        "eta1_level2.json": _level(2, L2, SIGMA2, LAMBDA2, H2),
        "eta1_level3.json": _level(3, L3, None, None, H3),
        "eta3_level1.json": _level(1, LP1, None, None, None, sigma_scale="3", H_scale="3"),
        "eta3_level0.json": _level(0, LP0, None, None, None, sigma_scale="3", H_scale="3"),
        "eta3_level-1.json": _level(-1, L_M1, SIGMA_M1, None, H_M1, sigma_f=SIGMA_M1_F),
        "eta5_level1.json": _level(1, ETA5_L1, None, None, ETA5_H1),
        "eta5_level2.json": _level(2, ETA5_L2, None, None, ETA5_H2),
    }


def golden_dir() -> Path:
    env = os.environ.get("TODA_GOLDEN_DIR")
    return Path(env) if env else Path(__file__).with_name("golden")


def load(name: str) -> dict:
    with open(golden_dir() / name, encoding="utf-8") as fh:
        return json.load(fh)


def dump(doc: dict) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def write(directory: Path) -> list[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for name, doc in golden_documents().items():
        path = directory / name
        path.write_text(dump(doc), encoding="utf-8")
        out.append(path)
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description="Regenerate the golden JSON files.")
    ap.add_argument("--write", metavar="DIR", type=Path, default=Path(__file__).with_name("golden"))
    args = ap.parse_args(argv)
    for p in write(args.write):
        print(p)


if __name__ == "__main__":
    main()
