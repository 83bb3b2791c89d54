"""Command-line front end: ``zeta --real S`` or ``zeta --complex SIGMA T``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from typing import Callable, Optional, TextIO

from .approx import EvalContext, as_real
from .dyadic import Dyadic, dy_to_decimal, dy_to_hex, parse_decimal
from .elementary import ComplexBall
from .errors import ContractError, DomainError, ParseError, ResourceError
from .reference import oracle_zeta_dirichlet, oracle_zeta_euler_maclaurin
from .zeta_complex import DEFAULT_GUARD_BITS, zeta_complex
from .zeta_real import zeta_real

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_RESOURCE = 4
EXIT_MISMATCH = 5

# tests replace this to corrupt a result before verification
result_hook: Optional[Callable] = None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ParseError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="zeta", description="Certified evaluation of the Riemann zeta function.")
    mode = ap.add_mutually_exclusive_group(required=True)
    mode.add_argument("--real", metavar="S", help="real argument s > 1 (decimal)")
    mode.add_argument("--complex", nargs=2, metavar=("SIGMA", "T"), help="complex argument sigma + i t")
    ap.add_argument("--bits", type=int, required=True, metavar="N", help="target accuracy 2**-N")
    ap.add_argument("--format", choices=("decimal", "hex", "json"), default="decimal")
    ap.add_argument("--stats", action="store_true", help="report resource counters")
    ap.add_argument("--verify", action="store_true", help="cross-check against an independent oracle")
    ap.add_argument("--p", type=int, metavar="P", help="override the range parameter (real mode)")
    ap.add_argument("--max-bits", type=int, default=2**20, metavar="B", help="cap on working precision")
    ap.add_argument("--max-terms", type=int, default=2**20, metavar="K", help="cap on series terms")
    ap.add_argument("--timeout", type=float, metavar="SEC", help="wall-clock limit")
    ap.add_argument("--guard", type=int, default=DEFAULT_GUARD_BITS, metavar="G",
                    help="minimum certified log2-distance from the exceptional set")
    ap.add_argument("--binomials", choices=("exact", "omega"), default="exact",
                    help="binomial source for the inner sums")
    return ap


def decimal_digits(n: int) -> int:
    return math.ceil(0.302 * n)


def _decimal(d: Dyadic, n: int) -> str:
    return dy_to_decimal(d, decimal_digits(n))


def _oracle(args, values):
    """Oracle enclosure for the request, or None when no oracle covers it."""
    n = args.bits + 8
    if args.real is not None:
        s = values[0]
        if s < 1 + Fraction(1, 256):
            return None
        return oracle_zeta_dirichlet(s, n).ball()
    sigma, t = values
    if sigma < Fraction(1, 4) or abs(t) > 100 or (sigma == 1 and t == 0):
        return None
    return oracle_zeta_euler_maclaurin(sigma, t, n).ball()


def verify(result, args, values) -> Optional[bool]:
    ref = _oracle(args, values)
    if ref is None:
        return None
    return result.intersects(ref)


def _render(result, args, verified, stats) -> str:
    n = args.bits
    if args.format == "json":
        if isinstance(result, ComplexBall):
            value = [_decimal(result.center.re, n), _decimal(result.center.im, n)]
            hexv = [dy_to_hex(result.center.re), dy_to_hex(result.center.im)]
            s = list(args.complex)
            mode = "complex"
        else:
            value = _decimal(result.center, n)
            hexv = dy_to_hex(result.center)
            s = args.real
            mode = "real"
        doc = {
            "mode": mode,
            "s": s,
            "bits": n,
            "value": value,
            "hex": hexv,
            "radius_exp": result.radius_exp,
            "verified": verified,
            "stats": stats.as_json(),
        }
        return json.dumps(doc)
    fmt = dy_to_hex if args.format == "hex" else (lambda d: _decimal(d, n))
    if isinstance(result, ComplexBall):
        re, im = result.center.re, result.center.im
        sign = "-" if im < 0 else "+"
        body = f"{fmt(re)} {sign} {fmt(abs(im)).lstrip('+')}i"
    else:
        body = fmt(result.center)
    lines = [f"{body} +/- 2^{result.radius_exp}"]
    if args.verify:
        lines.append(f"verified: {'null' if verified is None else str(verified).lower()}")
    if args.stats:
        lines.append("stats: " + json.dumps(stats.as_json()))
    return "\n".join(lines)


def run(argv=None, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if args.bits < 0:
            raise ParseError("--bits must be nonnegative")
        if args.complex is not None and args.p is not None:
            raise ParseError("--p applies to real mode only")
        ctx = EvalContext(max_bits=args.max_bits, max_terms=args.max_terms, timeout=args.timeout)
        if args.real is not None:
            values = (parse_decimal(args.real),)
            result = zeta_real(as_real(values[0]), args.bits, ctx, p=args.p, binomials=args.binomials)
        else:
            values = tuple(parse_decimal(v) for v in args.complex)
            sigma, t = (as_real(v) for v in values)
            result = zeta_complex(sigma, t, args.bits, ctx, guard_bits=args.guard, binomials=args.binomials)
        if result_hook is not None:
            result = result_hook(result)
        verified = verify(result, args, values) if args.verify else None
    except ParseError as e:
        print(f"zeta: error: {e}", file=err)
        return EXIT_USAGE
    except DomainError as e:
        print(f"zeta: domain error: {e}", file=err)
        return EXIT_DOMAIN
    except ResourceError as e:
        print(f"zeta: resource limit: {e}", file=err)
        return EXIT_RESOURCE
    except ContractError as e:
        print(f"zeta: internal error: {e}", file=err)
        return EXIT_INTERNAL
    print(_render(result, args, verified, ctx.stats), file=out)
    for d in ctx.stats.diagnostics:
        print(f"zeta: note: {d}", file=err)
    if verified is False:
        print("zeta: verification failed: result and oracle enclosures are disjoint", file=err)
        return EXIT_MISMATCH
    return EXIT_OK


def main() -> None:
    sys.exit(run())


__all__ = ["build_parser", "decimal_digits", "main", "run", "verify"]
