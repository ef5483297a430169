"""Exact distributional algebra in xi, |xi|, sgn(xi), delta, t, i and d^k sigma/dxi^k.

Terms carry exact Gaussian-rational coefficients. Canonical monomials use the
identities (valid for xi != 0, i.e. in the distributional sense)::

    xi = sgn |xi|,  sgn^2 = 1,  so  xi^a |xi|^c sgn^s = |xi|^P sgn^S,  P = a + c, S = a + s (mod 2)

and are stored as ``sgn^S`` (P = 0), ``xi^P`` (S = P mod 2) or ``xi^(P-1) |xi|``.
Products with delta keep only the value at xi = 0: ``xi delta = |xi| delta = sgn delta = 0``.
Differentiation uses d|xi| = sgn, d sgn = 2 delta; differentiating a term that
still carries delta would need delta', which is deliberately unrepresentable.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, NamedTuple, Optional

__all__ = [
    "GaussianRational",
    "Monomial",
    "SymTerm",
    "SymExpr",
    "Hypotheses",
    "SymParseError",
    "DistributionOrderOverflow",
    "parse",
    "render",
    "sigma",
    "differentiate",
    "annihilate",
    "phase_derivative",
    "differentiate_with_phase",
    "DiffEntry",
    "ExpansionDiff",
    "verify_expansion",
    "DeltaCoefficientFormula",
    "delta_coefficient_formula",
    "evaluate",
    "Transcription",
    "parse_transcriptions",
    "load_transcriptions",
    "load_allowlist",
    "compare_with_allowlist",
]


# ---------------------------------------------------------------- coefficients


@dataclass(frozen=True)
class GaussianRational:
    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    @classmethod
    def coerce(cls, v) -> "GaussianRational":
        if isinstance(v, GaussianRational):
            return v
        if isinstance(v, complex):
            return cls(Fraction(v.real), Fraction(v.imag))
        return cls(Fraction(v))

    def __add__(self, o):
        o = GaussianRational.coerce(o)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, o):
        return self + (-GaussianRational.coerce(o))

    def __rsub__(self, o):
        return GaussianRational.coerce(o) - self

    def __mul__(self, o):
        o = GaussianRational.coerce(o)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = GaussianRational.coerce(o)
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise ZeroDivisionError("division by zero coefficient")
        num = self * GaussianRational(o.re, -o.im)
        return GaussianRational(num.re / d, num.im / d)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def render(self) -> str:
        """Signed text form: ``3``, ``-3/2``, ``2*i``, ``-i``, ``(1 - 2*i)``."""
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            mag = abs(self.im)
            body = "i" if mag == 1 else f"{mag}*i"
            return ("-" if self.im < 0 else "") + body
        sign = "-" if self.im < 0 else "+"
        mag = abs(self.im)
        imag = "i" if mag == 1 else f"{mag}*i"
        return f"({self.re} {sign} {imag})"

    def __str__(self):
        return self.render()


ONE = GaussianRational(1)
I_UNIT = GaussianRational(0, 1)


# ---------------------------------------------------------------- monomials


class Monomial(NamedTuple):
    """Canonical monomial key; field order is the total term order.

    ``sigma_order`` is -1 for terms without a sigma factor.
    """

    sigma_order: int
    delta_flag: int
    t_power: int
    xi_power: int
    abs_power: int
    sgn_flag: int

    def render(self) -> str:
        parts = []
        if self.t_power:
            parts.append("t" if self.t_power == 1 else f"t^{self.t_power}")
        if self.xi_power:
            parts.append("xi" if self.xi_power == 1 else f"xi^{self.xi_power}")
        if self.abs_power:
            parts.append("abs")
        if self.sgn_flag:
            parts.append("sgn")
        if self.delta_flag:
            parts.append("delta")
        if self.sigma_order >= 0:
            parts.append(f"sigma^({self.sigma_order})")
        return "*".join(parts) if parts else "1"


def canonical_monomial(t_power, xi_power, abs_power, sgn_power, delta_power, sigma_order) -> Optional[Monomial]:
    """Reduce a raw product to its canonical key, or None if it vanishes."""
    if min(t_power, xi_power, abs_power, sgn_power, delta_power) < 0:
        raise ValueError("negative exponent")
    if delta_power > 1:
        raise ValueError("products of delta distributions are undefined")
    P = xi_power + abs_power
    S = (xi_power + sgn_power) % 2
    if delta_power == 1:
        if P > 0 or S == 1:
            return None
        return Monomial(sigma_order, 1, t_power, 0, 0, 0)
    if P == 0:
        return Monomial(sigma_order, 0, t_power, 0, 0, S)
    if S == P % 2:
        return Monomial(sigma_order, 0, t_power, P, 0, 0)
    return Monomial(sigma_order, 0, t_power, P - 1, 1, 0)


@dataclass(frozen=True)
class SymTerm:
    coeff: GaussianRational
    t_power: int
    xi_power: int
    abs_power: int
    sgn_flag: int
    delta_flag: int
    sigma_order: int

    @property
    def monomial(self) -> Monomial:
        return Monomial(self.sigma_order, self.delta_flag, self.t_power, self.xi_power,
                        self.abs_power, self.sgn_flag)


class SymExpr:
    """Immutable canonical sum of terms (monomial -> nonzero coefficient)."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Optional[Dict[Monomial, GaussianRational]] = None):
        clean = {}
        for key, c in (terms or {}).items():
            c = GaussianRational.coerce(c)
            if c:
                clean[key] = c
        self._terms = dict(sorted(clean.items()))

    @classmethod
    def from_raw(cls, items: Iterable) -> "SymExpr":
        """Build from (coeff, t, xi, abs, sgn, delta, sigma_order) tuples."""
        acc: Dict[Monomial, GaussianRational] = {}
        for coeff, t, a, c, s, d, k in items:
            key = canonical_monomial(t, a, c, s, d, k)
            if key is None:
                continue
            acc[key] = acc.get(key, GaussianRational()) + GaussianRational.coerce(coeff)
        return cls(acc)

    @classmethod
    def constant(cls, c) -> "SymExpr":
        return cls({Monomial(-1, 0, 0, 0, 0, 0): GaussianRational.coerce(c)})

    @property
    def mapping(self) -> Dict[Monomial, GaussianRational]:
        return dict(self._terms)

    @property
    def terms(self) -> tuple:
        return tuple(
            SymTerm(c, k.t_power, k.xi_power, k.abs_power, k.sgn_flag, k.delta_flag, k.sigma_order)
            for k, c in self._terms.items()
        )

    def coefficient(self, key: Monomial) -> GaussianRational:
        return self._terms.get(key, GaussianRational())

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def __eq__(self, other):
        return isinstance(other, SymExpr) and self._terms == other._terms

    def __hash__(self):
        return hash(tuple(self._terms.items()))

    def __add__(self, other: "SymExpr") -> "SymExpr":
        acc = dict(self._terms)
        for k, c in other._terms.items():
            acc[k] = acc.get(k, GaussianRational()) + c
        return SymExpr(acc)

    def __neg__(self):
        return SymExpr({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "SymExpr":
        c = GaussianRational.coerce(c)
        return SymExpr({k: c * v for k, v in self._terms.items()})

    def __mul__(self, other):
        if not isinstance(other, SymExpr):
            return self.scale(other)
        items = []
        for k1, c1 in self._terms.items():
            for k2, c2 in other._terms.items():
                if k1.sigma_order >= 0 and k2.sigma_order >= 0:
                    raise ValueError("products of two sigma factors are not supported")
                items.append((
                    c1 * c2,
                    k1.t_power + k2.t_power,
                    k1.xi_power + k2.xi_power,
                    k1.abs_power + k2.abs_power,
                    k1.sgn_flag + k2.sgn_flag,
                    k1.delta_flag + k2.delta_flag,
                    max(k1.sigma_order, k2.sigma_order),
                ))
        return SymExpr.from_raw(items)

    __rmul__ = __mul__

    def render(self) -> str:
        return render(self)

    def __repr__(self):
        return f"SymExpr({render(self)!r})"


def sigma(k: int = 0) -> SymExpr:
    return SymExpr({Monomial(k, 0, 0, 0, 0, 0): ONE})


# ---------------------------------------------------------------- render / parse


def _render_term(coeff: GaussianRational, key: Monomial, first: bool) -> str:
    mono = key.render()
    negative = (coeff.im == 0 and coeff.re < 0) or (coeff.re == 0 and coeff.im < 0)
    mag = -coeff if negative else coeff
    if mono == "1":
        body = mag.render()
    elif mag == ONE:
        body = mono
    else:
        body = f"{mag.render()}*{mono}"
    if first:
        return ("-" if negative else "") + body
    return (" - " if negative else " + ") + body


def render(e: SymExpr) -> str:
    """Deterministic text form; terms appear in the canonical total order."""
    if len(e) == 0:
        return "0"
    return "".join(_render_term(c, k, j == 0) for j, (k, c) in enumerate(e))


class SymParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


_TOKEN = re.compile(r"\s*(?:(\d+)|(sigma|delta|abs|sgn|xi|t|i)|(\^|\(|\)|\+|-|−|\*|/))")


def _tokenize(text: str):
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            pos += len(text[pos:]) - len(text[pos:].lstrip())
            raise SymParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastindex)
        if m.group(1):
            tokens.append(("num", int(m.group(1)), start))
        elif m.group(2):
            tokens.append(("atom", m.group(2), start))
        else:
            op = m.group(3)
            tokens.append(("op", "-" if op == "−" else op, start))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


_ATOMS = {
    "t": (1, 0, 0, 0, 0),
    "xi": (0, 1, 0, 0, 0),
    "abs": (0, 0, 1, 0, 0),
    "sgn": (0, 0, 0, 1, 0),
    "delta": (0, 0, 0, 0, 1),
}


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.j = 0

    def peek(self):
        return self.tokens[self.j]

    def take(self):
        tok = self.tokens[self.j]
        self.j += 1
        return tok

    def expect(self, value):
        tok = self.take()
        if tok[0] != "op" or tok[1] != value:
            raise SymParseError(f"expected {value!r}", tok[2])
        return tok

    def parse(self) -> SymExpr:
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise SymParseError(f"unexpected {tok[1]!r}", tok[2])
        return e

    def expr(self) -> SymExpr:
        sign = 1
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            sign = -1 if tok[1] == "-" else 1
        e = self.product().scale(sign)
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] in "+-":
                self.take()
                rhs = self.product()
                e = e + rhs if tok[1] == "+" else e - rhs
            else:
                return e

    def _starts_factor(self, tok) -> bool:
        return tok[0] in ("num", "atom") or (tok[0] == "op" and tok[1] == "(")

    def product(self) -> SymExpr:
        e = self.power()
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] == "*":
                self.take()
                e = e * self.power()
            elif tok[0] == "op" and tok[1] == "/":
                self.take()
                pos = self.peek()[2]
                d = self.power()
                keys = list(d.mapping)
                if len(keys) != 1 or keys[0] != Monomial(-1, 0, 0, 0, 0, 0):
                    raise SymParseError("division only by a nonzero number", pos)
                e = e.scale(ONE / d.mapping[keys[0]])
            elif self._starts_factor(tok):
                e = e * self.power()
            else:
                return e

    def _exponent(self) -> int:
        tok = self.take()
        if tok[0] == "op" and tok[1] == "(":
            val = self.take()
            if val[0] != "num":
                raise SymParseError("expected integer exponent", val[2])
            self.expect(")")
            return val[1]
        if tok[0] != "num":
            raise SymParseError("expected integer exponent", tok[2])
        return tok[1]

    def power(self) -> SymExpr:
        tok = self.take()
        if tok[0] == "atom" and tok[1] == "sigma":
            order = 0
            if self.peek()[0] == "op" and self.peek()[1] == "^":
                self.take()
                order = self._exponent()
            return sigma(order)
        if tok[0] == "num":
            base = SymExpr.constant(tok[1])
        elif tok[0] == "atom" and tok[1] == "i":
            base = SymExpr.constant(I_UNIT)
        elif tok[0] == "atom":
            base = None
            name = tok[1]
        elif tok[0] == "op" and tok[1] == "(":
            base = self.expr()
            self.expect(")")
        else:
            raise SymParseError(f"unexpected {tok[1]!r}", tok[2])
        exp = 1
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            exp = self._exponent()
        if base is None:
            t, a, c, s, d = (v * exp for v in _ATOMS[name])
            if d > 1:
                raise SymParseError("delta raised to a power above 1", tok[2])
            return SymExpr.from_raw([(ONE, t, a, c, s, d, -1)])
        out = SymExpr.constant(ONE)
        for _ in range(exp):
            out = out * base
        return out


def parse(text: str) -> SymExpr:
    """Parse the expression language (see module docstring of the CLI docs)."""
    return _Parser(text).parse()


# ---------------------------------------------------------------- calculus


class DistributionOrderOverflow(ArithmeticError):
    """Differentiating a surviving delta term would need delta'."""


def differentiate(e: SymExpr) -> SymExpr:
    """d/dxi with d|xi| = sgn, d sgn = 2 delta and d sigma^(k) = sigma^(k+1)."""
    items = []
    for key, c in e:
        if key.delta_flag:
            raise DistributionOrderOverflow(
                f"distribution order overflow: d/dxi of {_render_term(c, key, True)} needs delta'"
            )
        t, a, ab, s, k = key.t_power, key.xi_power, key.abs_power, key.sgn_flag, key.sigma_order
        if k >= 0:
            items.append((c, t, a, ab, s, 0, k + 1))
        if a:
            items.append((c * a, t, a - 1, ab, s, 0, k))
        if ab:
            items.append((c, t, a, ab - 1, s + 1, 0, k))
        if s:
            items.append((c * 2, t, a, ab, s - 1, 1, k))
    return SymExpr.from_raw(items)


@dataclass(frozen=True)
class Hypotheses:
    """Orders k with d^k sigma/dxi^k (0) = 0."""

    vanishing_orders: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "vanishing_orders", frozenset(int(k) for k in self.vanishing_orders))


def annihilate(e: SymExpr, hyp: Hypotheses) -> SymExpr:
    """Drop delta * sigma^(k) terms for k in the hypotheses."""
    return SymExpr({k: c for k, c in e if not (k.delta_flag and k.sigma_order in hyp.vanishing_orders)})


def phase_derivative() -> SymExpr:
    """d/dxi of t(xi^3 - xi|xi|) times i: i t (3 xi^2 - 2|xi|)."""
    return parse("3*i*t*xi^2 - 2*i*t*abs")


def differentiate_with_phase(order: int, hyp=frozenset()) -> SymExpr:
    """E_order with d^order(mu sigma) = E_order * mu, mu = exp(i t (xi^3 - xi|xi|)).

    E_0 = sigma and E_(n+1) = d E_n + (i t (3 xi^2 - 2|xi|)) E_n, with hypothesis
    annihilation applied after every order.
    """
    if int(order) != order or order < 0:
        raise ValueError("order must be a nonnegative integer")
    if not isinstance(hyp, Hypotheses):
        hyp = Hypotheses(frozenset(hyp))
    dphi = phase_derivative()
    e = sigma(0)
    for _ in range(int(order)):
        e = annihilate(differentiate(e) + dphi * e, hyp)
    return e


# ---------------------------------------------------------------- verification


@dataclass(frozen=True)
class DiffEntry:
    monomial: Monomial
    engine_coeff: GaussianRational
    paper_coeff: GaussianRational

    def as_json(self, label: str = "") -> dict:
        out = {"label": label} if label else {}
        out.update(
            monomial=self.monomial.render(),
            engine_coeff=self.engine_coeff.render(),
            paper_coeff=self.paper_coeff.render(),
        )
        return out


@dataclass(frozen=True)
class ExpansionDiff:
    order: int
    hypotheses: Hypotheses
    entries: tuple

    @property
    def verified(self) -> bool:
        return not self.entries

    def symmetric_difference(self) -> list:
        """(side, monomial, coeff) items present in one term multiset only."""
        out = []
        for e in self.entries:
            if e.engine_coeff:
                out.append(("engine", e.monomial, e.engine_coeff))
            if e.paper_coeff:
                out.append(("transcription", e.monomial, e.paper_coeff))
        return out

    def to_jsonl(self, label: str = "") -> str:
        return "".join(json.dumps(e.as_json(label), sort_keys=True) + "\n" for e in self.entries)

    def to_text(self, label: str = "") -> str:
        head = f"{label} " if label else ""
        orders = sorted(self.hypotheses.vanishing_orders)
        lines = [f"{head}order {self.order}, vanishing orders {orders}: "
                 + ("verified" if self.verified else f"{len(self.entries)} discrepant monomials")]
        for e in self.entries:
            lines.append(f"  {e.monomial.render():<28} engine {e.engine_coeff.render():<10} "
                         f"transcription {e.paper_coeff.render()}")
        return "\n".join(lines) + "\n"


def verify_expansion(order: int, hyp, transcription: SymExpr) -> ExpansionDiff:
    """Compare the engine's E_order with a transcribed expansion, monomial by monomial."""
    if not isinstance(hyp, Hypotheses):
        hyp = Hypotheses(frozenset(hyp))
    engine = differentiate_with_phase(order, hyp)
    keys = sorted(set(engine.mapping) | set(transcription.mapping))
    entries = tuple(
        DiffEntry(k, engine.coefficient(k), transcription.coefficient(k))
        for k in keys
        if engine.coefficient(k) != transcription.coefficient(k)
    )
    return ExpansionDiff(order, hyp, entries)


# ---------------------------------------------------------------- delta coefficient


@dataclass(frozen=True)
class DeltaCoefficientFormula:
    """G(t) = sum c * t^p * M1^a * P^b as {(p, a, b): c}, exact rationals.

    G is the coefficient of delta in d^4/dxi^4 of the Fourier transform of
    u(t) = U(t)phi - int_0^t U(t - s) (1/2) d/dx u^2 ds, in terms of
    M1 = int x phi and P = ||phi||^2 (conserved).
    """

    coefficients: tuple

    @property
    def mapping(self) -> dict:
        return dict(self.coefficients)

    def __call__(self, t, M1, P):
        return sum(float(c) * t**p * M1**a * P**b for (p, a, b), c in self.coefficients)

    def root_ratio(self) -> Fraction:
        """r with the nonzero root t* = r * M1 / P (requires the form c1 t M1 + c2 t^2 P)."""
        m = self.mapping
        if set(m) != {(1, 1, 0), (2, 0, 1)}:
            raise ValueError(f"unexpected structure {m}")
        return -m[(1, 1, 0)] / m[(2, 0, 1)]

    def render(self) -> str:
        parts = []
        for (p, a, b), c in self.coefficients:
            mono = "*".join(
                s for s in (
                    f"t^{p}" if p > 1 else ("t" if p else ""),
                    f"M1^{a}" if a > 1 else ("M1" if a else ""),
                    f"P^{b}" if b > 1 else ("P" if b else ""),
                ) if s
            )
            parts.append(f"{c}*{mono}" if mono else str(c))
        return " + ".join(parts).replace("+ -", "- ") if parts else "0"


def delta_coefficient_formula() -> DeltaCoefficientFormula:
    """Combine the engine's order-4 delta*sigma' coefficient with the Duhamel integral.

    With c(t) delta sigma^(1) the only surviving delta term of E_4 under
    sigma(0) = 0 (the mean-zero case):

    * linear part: c(t) * d_xi phi^(0) = c(t) * (-i M1);
    * Duhamel part: -int_0^t c(t - s) d_xi kappa^(s, 0) ds with
      d_xi kappa^(s, 0) = (i/2) ||u(s)||^2 = (i/2) P.
    """
    e4 = differentiate_with_phase(4, Hypotheses(frozenset({0})))
    delta_terms = [(k, c) for k, c in e4 if k.delta_flag]
    if len(delta_terms) != 1 or delta_terms[0][0].sigma_order != 1:
        raise ValueError(f"unexpected delta structure in E_4: {delta_terms}")
    key, c = delta_terms[0]
    p = key.t_power
    lin = c * GaussianRational(0, -1)
    # int_0^t (t - s)^p ds = t^(p+1)/(p+1)
    duh = -(c * GaussianRational(0, Fraction(1, 2))) / (p + 1)
    out = {}
    for monomial, coeff in (((p, 1, 0), lin), ((p + 1, 0, 1), duh)):
        if coeff.im != 0:
            raise ValueError("delta coefficient is not real")
        out[monomial] = coeff.re
    return DeltaCoefficientFormula(tuple(sorted(out.items())))


# ---------------------------------------------------------------- numerics


def evaluate(e: SymExpr, xi, t, sigma_values, ctx=None):
    """Evaluate a delta-free expression at xi != 0.

    ``sigma_values[k]`` is the value of d^k sigma/dxi^k at xi. ``ctx`` may be
    ``mpmath.mp`` for arbitrary precision; plain Python complex arithmetic otherwise.
    """
    total = 0
    for key, c in e:
        if key.delta_flag:
            raise ValueError("cannot evaluate a delta term pointwise")
        if ctx is not None:
            coef = ctx.mpc(ctx.mpf(c.re.numerator) / c.re.denominator,
                           ctx.mpf(c.im.numerator) / c.im.denominator)
            absx, sgn = ctx.fabs(xi), ctx.sign(xi)
        else:
            coef = complex(c)
            absx, sgn = abs(xi), (xi > 0) - (xi < 0)
        term = coef * t**key.t_power * xi**key.xi_power * absx**key.abs_power * sgn**key.sgn_flag
        if key.sigma_order >= 0:
            term = term * sigma_values[key.sigma_order]
        total = total + term
    return total


# ---------------------------------------------------------------- transcription files


@dataclass(frozen=True)
class Transcription:
    label: str
    order: int
    hypotheses: Hypotheses
    expr: SymExpr
    text: str


_HEADER = re.compile(r"^\[(\w+)((?:\s+\w+=[\w,]*)*)\s*\]$")


def parse_transcriptions(text: str) -> Dict[str, Transcription]:
    """Parse ``[LABEL order=K vanishing=a,b]`` blocks, each holding one expression."""
    blocks = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        m = _HEADER.match(line.strip())
        if m:
            meta = dict(item.split("=", 1) for item in m.group(2).split())
            unknown = set(meta) - {"order", "vanishing"}
            if unknown or "order" not in meta:
                raise ValueError(f"line {lineno}: header needs order= and optional vanishing=")
            blocks.append([m.group(1), meta, []])
        elif not blocks:
            raise ValueError(f"line {lineno}: expression before any [LABEL] header")
        else:
            blocks[-1][2].append(line.strip())
    out = {}
    for label, meta, lines in blocks:
        if label in out:
            raise ValueError(f"duplicate block {label}")
        body = " ".join(lines)
        orders = frozenset(int(v) for v in meta.get("vanishing", "").split(",") if v)
        try:
            expr = parse(body)
        except SymParseError as exc:
            raise SymParseError(f"in block {label}: {exc}", exc.position) from None
        out[label] = Transcription(label, int(meta["order"]), Hypotheses(orders), expr, body)
    return out


def load_transcriptions(path=None) -> Dict[str, Transcription]:
    """Read a transcription file; the packaged DER3/DER4 file by default."""
    if path is None:
        from importlib import resources

        text = resources.files("benjamin_lab").joinpath("data/transcriptions.txt").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return parse_transcriptions(text)


def load_allowlist(path=None) -> list:
    """Known discrepancies as dicts with label, monomial, engine_coeff, paper_coeff."""
    if path is None:
        from importlib import resources

        text = resources.files("benjamin_lab").joinpath("data/allowlist.jsonl").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def _entry_key(d: dict) -> tuple:
    return (d["label"], d["monomial"], d["engine_coeff"], d["paper_coeff"])


def compare_with_allowlist(label: str, diff: ExpansionDiff, allowlist: list):
    """Split discrepancies into (unexpected, allowed) and list allowlisted items not seen."""
    allowed_keys = {_entry_key(d) for d in allowlist if d["label"] == label}
    seen = [e.as_json(label) for e in diff.entries]
    unexpected = [d for d in seen if _entry_key(d) not in allowed_keys]
    allowed = [d for d in seen if _entry_key(d) in allowed_keys]
    seen_keys = {_entry_key(d) for d in seen}
    stale = sorted(k for k in allowed_keys if k not in seen_keys)
    return unexpected, allowed, stale
