"""Text grammar for polynomial expressions.

::

    expr   := term (('+' | '-') term)*
    term   := unary ('*' unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' INTEGER)?
    atom   := NUMBER | IDENT | '(' expr ')'

Implicit multiplication is rejected: ``2x1`` is a syntax error.
:func:`format_polynomial` prints with ``repr`` floats, so printing and
reparsing reproduces coefficients exactly.
"""
import re
from dataclasses import dataclass
from typing import List

from polystab.poly.polynomial import Polynomial
from polystab.poly.space import VariableSpace
from polystab.utils.exceptions import PolynomialSyntaxError, UnknownVariableError, UnresolvedDecisionError

_TOKEN = re.compile(r'''
    (?P<ws>\s+)
  | (?P<number>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[^\W\d]\w*)
  | (?P<op>[-+*^()])
''', re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    position: int


def tokenize(text: str) -> List[Token]:
    tokens = []
    position = 0
    while position < len(text):
        match = _TOKEN.match(text, position)
        if match is None:
            raise PolynomialSyntaxError(f'Unexpected character {text[position]!r}', text, position)
        kind = match.lastgroup
        if kind != 'ws':
            tokens.append(Token(kind, match.group(), position))
        position = match.end()
    tokens.append(Token('end', '', len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, space: VariableSpace):
        self.text = text
        self.space = space
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def error(self, message: str) -> PolynomialSyntaxError:
        return PolynomialSyntaxError(message, self.text, self.current.position)

    def accept(self, text: str) -> bool:
        if self.current.kind == 'op' and self.current.text == text:
            self.pos += 1
            return True
        return False

    def parse(self) -> Polynomial:
        if self.current.kind == 'end':
            raise self.error('Empty expression')
        result = self.expr()
        if self.current.kind != 'end':
            raise self.error(f'Unexpected {self.current.text!r}')
        return result

    def expr(self) -> Polynomial:
        result = self.term()
        while True:
            if self.accept('+'):
                result = result + self.term()
            elif self.accept('-'):
                result = result - self.term()
            else:
                return result

    def term(self) -> Polynomial:
        result = self.unary()
        while self.accept('*'):
            result = result * self.unary()
        return result

    def unary(self) -> Polynomial:
        if self.accept('-'):
            return -self.unary()
        if self.accept('+'):
            return self.unary()
        return self.power()

    def power(self) -> Polynomial:
        base = self.atom()
        if self.accept('^'):
            token = self.current
            if token.kind != 'number' or not token.text.isdigit():
                raise self.error('Exponent must be a non-negative integer')
            self.pos += 1
            return base ** int(token.text)
        return base

    def atom(self) -> Polynomial:
        token = self.current
        if token.kind == 'number':
            self.pos += 1
            return Polynomial.constant(self.space, float(token.text))
        if token.kind == 'ident':
            self.pos += 1
            if token.text not in self.space.names:
                raise UnknownVariableError(token.text, token.position)
            return Polynomial.variable(self.space, token.text)
        if self.accept('('):
            inner = self.expr()
            if not self.accept(')'):
                raise self.error("Expected ')'")
            return inner
        if token.kind == 'end':
            raise self.error('Unexpected end of expression')
        raise self.error(f'Unexpected {token.text!r}')


def parse_polynomial(text: str, space: VariableSpace) -> Polynomial:
    return _Parser(str(text), space).parse()


def _format_monomial(space: VariableSpace, monomial) -> str:
    factors = []
    for name, e in zip(space.names, monomial):
        if e == 1:
            factors.append(name)
        elif e > 1:
            factors.append(f'{name}^{e}')
    return '*'.join(factors)


def format_polynomial(poly: Polynomial) -> str:
    if not poly.is_numeric:
        raise UnresolvedDecisionError('cannot print a polynomial with decision coefficients')
    if poly.is_zero:
        return '0'
    parts = []
    for monomial, coef in poly.items():
        body = _format_monomial(poly.space, monomial)
        magnitude = abs(coef)
        if not body:
            text = repr(magnitude)
        elif magnitude == 1.0:
            text = body
        else:
            text = f'{magnitude!r}*{body}'
        if not parts:
            parts.append(f'-{text}' if coef < 0 else text)
        else:
            parts.append(f'- {text}' if coef < 0 else f'+ {text}')
    return ' '.join(parts)
