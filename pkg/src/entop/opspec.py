"""Parser for the operator specification mini-language.

Grammar (whitespace is ignored between tokens)::

    spec      := ALIAS | sum
    sum       := [sign] term (sign term)*
    sign      := '+' | '-'
    term      := [coeff '*'] '[' factor (',' factor)* ']'
    coeff     := cprod                      (no top-level '+'/'-'; use parentheses)
    cexpr     := [sign] cprod (sign cprod)*
    cprod     := cunary (('*' | '/') cunary)*
    cunary    := sign cunary | cpow
    cpow      := atom ['^' cunary]
    atom      := NUMBER | 'i' | 'j' | 'pi' | 'e' | FUNC '(' cexpr ')' | '(' cexpr ')'
    FUNC      := 'exp' | 'sqrt' | 'cos' | 'sin'
    factor    := 'I' | 'X' | 'Y' | 'Z' | 'P0' | 'P1'
               | 'H' '(' cexpr ')' | 'Q' '(' cexpr ')'
               | 'U' '[' cexpr ',' cexpr ';' cexpr ',' cexpr ']'
    ALIAS     := 'SWAP' | 'CNOT' | 'CZ' | 'EF' | 'GHZ' | 'W' | 'TOFFOLI'

``H(t)`` and ``Q(t)`` are half- and quarter-wave plates with fast axis at
angle ``t`` radians (the argument must evaluate to a real number).
``U[a,b;c,d]`` is the explicit matrix ``[[a, b], [c, d]]``.
The resulting coefficients are rescaled by one positive constant so that
``sum |c_k|^2 = 1``.

Examples: ``1*[Z,Z] + 1*[X,X]``, ``[I,I] + i*[X,X]``,
``exp(i*pi/2)*[H(pi/8), Q(0)]``, ``SWAP``.
"""

from __future__ import annotations

import cmath
import re
from dataclasses import dataclass

import numpy as np

from . import operators as ops
from .errors import ParseError

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[\[\](),;*/+\-^]))"
)

_CONSTANTS = {"i": 1j, "j": 1j, "pi": np.pi, "e": np.e}
_FUNCS = {"exp": cmath.exp, "sqrt": cmath.sqrt, "cos": cmath.cos, "sin": cmath.sin}
_FIXED = {"I": ops.I, "X": ops.X, "Y": ops.Y, "Z": ops.Z, "P0": ops.P0, "P1": ops.P1}
ALIASES = {
    "SWAP": ops.swap_operator,
    "CNOT": ops.cnot_operator,
    "CZ": lambda: ops.controlled_unitary(ops.Z),
    "EF": ops.entanglement_filter,
    "GHZ": ops.ghz_operator,
    "W": ops.w_operator,
    "TOFFOLI": lambda: ops.ccu(ops.X),
}


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _fmt(z: complex) -> str:
    if abs(z.imag) < 1e-15:
        return f"{z.real:.6g}"
    if abs(z.real) < 1e-15:
        return f"{z.imag:.6g}i"
    return f"({z.real:.6g}{z.imag:+.6g}i)"


def tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            col = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[col]!r}", text, col)
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(_Tok("end", "", n))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    @property
    def cur(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.cur
        raise ParseError(msg, self.text, tok.pos)

    def accept(self, text: str) -> bool:
        if self.cur.kind == "op" and self.cur.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> None:
        if not self.accept(text):
            found = self.cur.text or "end of input"
            self.error(f"expected {text!r}, found {found!r}")

    # operator level

    def spec(self) -> ops.BranchSuperposition:
        if self.cur.kind == "name" and self.cur.text in ALIASES and self.peek().kind == "end":
            return ALIASES[self.cur.text]()
        terms, starts = [], []
        sign = 1.0
        if self.accept("-"):
            sign = -1.0
        else:
            self.accept("+")
        starts.append(self.cur)
        terms.append(self.term(sign))
        while self.cur.kind != "end":
            if self.accept("+"):
                sign = 1.0
            elif self.accept("-"):
                sign = -1.0
            else:
                self.error("expected '+' or '-' between terms")
            starts.append(self.cur)
            terms.append(self.term(sign))
        n0 = len(terms[0][1])
        for (_, fs), tok in zip(terms, starts):
            if len(fs) != n0:
                self.error(f"term acts on {len(fs)} parties, the first term on {n0}", tok)
        try:
            return ops.build_superposition(terms)
        except ops.EmptyTermList as exc:
            self.error(str(exc), self.toks[0])

    def term(self, sign: float):
        start = self.cur
        coeff: complex = 1.0
        if not (self.cur.kind == "op" and self.cur.text == "["):
            coeff = self.cunary()
            while True:
                if self.cur.kind == "op" and self.cur.text == "*" and self.peek().text == "[":
                    self.i += 1
                    break
                if self.accept("*"):
                    coeff *= self.cunary()
                elif self.accept("/"):
                    den = self.cunary()
                    if den == 0:
                        self.error("division by zero", start)
                    coeff /= den
                else:
                    self.error("expected '*[' before the factor list")
        return sign * coeff, self.factors()

    def factors(self) -> list[ops.LocalOperator]:
        self.expect("[")
        out = [self.factor()]
        while self.accept(","):
            out.append(self.factor())
        self.expect("]")
        return out

    def factor(self) -> ops.LocalOperator:
        tok = self.cur
        if tok.kind != "name":
            self.error(f"expected a local operator, found {tok.text or 'end of input'!r}")
        self.i += 1
        name = tok.text
        if name in _FIXED:
            return _FIXED[name]
        if name in ("H", "Q"):
            self.expect("(")
            arg_start = self.cur.pos
            angle = self.cexpr()
            arg_text = self.text[arg_start:self.cur.pos].strip()
            self.expect(")")
            if abs(angle.imag) > 1e-12:
                self.error("waveplate angle must be real", tok)
            theta = angle.real
            m = ops.waveplate(theta, np.pi if name == "H" else np.pi / 2)
            return ops.LocalOperator(m, f"{name}({arg_text})")
        if name == "U":
            self.expect("[")
            a = self.cexpr()
            self.expect(",")
            b = self.cexpr()
            self.expect(";")
            c = self.cexpr()
            self.expect(",")
            d = self.cexpr()
            self.expect("]")
            label = "U[{},{};{},{}]".format(*(_fmt(z) for z in (a, b, c, d)))
            return ops.LocalOperator(np.array([[a, b], [c, d]]), label)
        self.error(f"unknown local operator {name!r}", tok)

    # complex arithmetic

    def cexpr(self) -> complex:
        if self.accept("-"):
            val = -self.cprod()
        else:
            self.accept("+")
            val = self.cprod()
        while True:
            if self.accept("+"):
                val += self.cprod()
            elif self.accept("-"):
                val -= self.cprod()
            else:
                return val

    def cprod(self) -> complex:
        val = self.cunary()
        while True:
            if self.accept("*"):
                val *= self.cunary()
            elif self.accept("/"):
                tok = self.cur
                den = self.cunary()
                if den == 0:
                    self.error("division by zero", tok)
                val /= den
            else:
                return val

    def cunary(self) -> complex:
        if self.accept("-"):
            return -self.cunary()
        if self.accept("+"):
            return self.cunary()
        base = self.atom()
        if self.accept("^"):
            return complex(base) ** self.cunary()
        return base

    def atom(self) -> complex:
        tok = self.cur
        if tok.kind == "num":
            self.i += 1
            return complex(float(tok.text))
        if tok.kind == "name":
            self.i += 1
            if tok.text in _CONSTANTS:
                return complex(_CONSTANTS[tok.text])
            if tok.text in _FUNCS:
                self.expect("(")
                arg = self.cexpr()
                self.expect(")")
                return complex(_FUNCS[tok.text](arg))
            self.error(f"unknown name {tok.text!r} in coefficient", tok)
        if self.accept("("):
            val = self.cexpr()
            self.expect(")")
            return val
        self.error(f"expected a number, found {tok.text or 'end of input'!r}")


def parse_operator(text: str) -> ops.BranchSuperposition:
    """Parse an operator spec into a normalized :class:`BranchSuperposition`."""
    if not text or not text.strip():
        raise ParseError("empty operator spec", text or "", 0)
    return _Parser(text).spec()


def parse_complex(text: str) -> complex:
    p = _Parser(text)
    val = p.cexpr()
    if p.cur.kind != "end":
        p.error("trailing input")
    return val


def parse_ket(spec) -> np.ndarray:
    """Input-state spec: a token string over {H,V,D,A,R,L,0,1} or an amplitude list.

    Amplitude lists may contain numbers, ``[re, im]`` pairs or complex
    literal strings; the ket is normalized.
    """
    from .tomography import SINGLE_QUBIT_KETS  # avoid import cycle at module load

    if isinstance(spec, str):
        s = spec.strip()
        if not s:
            raise ParseError("empty ket spec", spec, 0)
        vec = np.ones(1, dtype=complex)
        for col, ch in enumerate(s):
            key = {"0": "H", "1": "V"}.get(ch, ch)
            if key not in SINGLE_QUBIT_KETS:
                raise ParseError(f"unknown ket symbol {ch!r}", spec, col)
            vec = np.kron(vec, SINGLE_QUBIT_KETS[key])
        return vec
    amps = []
    for a in spec:
        if isinstance(a, str):
            amps.append(parse_complex(a))
        elif isinstance(a, (list, tuple)):
            amps.append(complex(a[0], a[1]))
        else:
            amps.append(complex(a))
    v = np.array(amps, dtype=complex)
    n = np.linalg.norm(v)
    if v.size == 0 or n == 0 or (v.size & (v.size - 1)):
        raise ParseError("amplitude list must be a non-zero vector of length 2^N", str(spec), 0)
    return v / n
