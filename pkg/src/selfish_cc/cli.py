"""Command-line front end: trade-off and gain tables, worked demos, verification sweeps, counts."""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
import time
from dataclasses import dataclass
from decimal import Context, Decimal
from fractions import Fraction
from typing import Any, Callable, Sequence

from . import bounds, delivery, demands, oracle
from .fds import (
    DEFAULT_CAP,
    CapExceededError,
    FdsStructure,
    UserSet,
    count_valid_demands,
    enumerate_valid_demands,
    subsets_of_size,
)
from .placement import SubfileId, selfish_man_placement

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_CAP = 0, 1, 2, 3

SCENARIOS = ("5-4-1-t2", "5-4-1-t3", "6-5-1-t3", "5-3-3-t2")
ALPHA_RULES = (("K/2", Fraction(1, 2)), ("4K/5", Fraction(4, 5)), ("19K/20", Fraction(19, 20)))


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    K: int | None = None
    alpha: int | None = None
    f: int = 1
    t: int | None = None
    gamma: Fraction = Fraction(1, 20)
    scenario: str | None = None
    fmt: str = "csv"
    precision: int = 12
    cap: int = DEFAULT_CAP
    seed: int = 0
    gnuplot: bool = False
    enumerate: bool = False

    def structure(self) -> FdsStructure:
        if self.K is None or self.alpha is None:
            raise ConfigError(f"{self.command} needs --K and --alpha")
        try:
            s = FdsStructure(self.K, self.alpha, self.f)
        except ValueError as e:
            raise ConfigError(str(e)) from None
        if self.t is not None and not 0 <= self.t <= s.alpha:
            raise ConfigError(f"--t must lie in [0, {s.alpha}]")
        return s


# ------------------------------------------------------------- output ----


def to_decimal(x: Fraction, precision: int = 12) -> str:
    q = Context(prec=precision).divide(Decimal(x.numerator), Decimal(x.denominator))
    text = format(q, "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return "0" if text in ("-0", "") else text


Cell = Fraction | int | str | None


class Table:
    def __init__(self, columns: Sequence[str]):
        self.columns = list(columns)
        self.rows: list[list[Cell]] = []

    def add(self, *cells: Cell) -> None:
        if len(cells) != len(self.columns):
            raise ValueError("row width differs from header")
        self.rows.append(list(cells))

    def render(self, cfg: ExperimentConfig) -> str:
        if cfg.fmt == "json":
            return json.dumps(
                {"columns": self.columns, "rows": [
                    {c: _json_cell(v, cfg.precision) for c, v in zip(self.columns, row)}
                    for row in self.rows
                ]},
                indent=2,
            ) + "\n"
        if cfg.gnuplot:
            lines = ["# " + " ".join(self.columns)]
            for row in self.rows:
                lines.append(" ".join(_text_cell(v, cfg.precision) or "NaN" for v in row))
            return "\n".join(lines) + "\n"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_text_cell(v, cfg.precision) for v in row])
        return buf.getvalue()


def _text_cell(v: Cell, precision: int) -> str:
    if v is None:
        return ""
    if isinstance(v, Fraction):
        return to_decimal(v, precision)
    return str(v)


def _json_cell(v: Cell, precision: int) -> Any:
    if isinstance(v, Fraction):
        return {"decimal": to_decimal(v, precision), "num": v.numerator, "den": v.denominator}
    return v


# ----------------------------------------------------------- commands ----


def cmd_tradeoff(cfg: ExperimentConfig) -> Table:
    s = cfg.structure()
    if s.alpha == s.K and s.f < s.K:
        warn(f"alpha = K with f = {s.f} < K: the worst-case reading of the bound assumes f >= K")
    K, alpha = s.K, s.alpha
    tab = Table(["t", "M", "R_lb", "R_man", "R_uncoded_selfish", "R_uncoded_unselfish"])
    for t in range(max(alpha, K) + 1):
        M = Fraction(t * s.N, K)
        if t <= alpha:
            unc = bounds.uncoded_loads(K, alpha, t)
            lb, sel = bounds.r_lb(K, alpha, t), unc.selfish
        else:
            lb = sel = None
        tab.add(t, M, lb, bounds.r_man(K, t), sel, Fraction(K - t))
    return tab


def cmd_gains(cfg: ExperimentConfig) -> Table:
    gamma = cfg.gamma
    if not 0 <= gamma <= 1:
        raise ConfigError("--gamma must lie in [0, 1]")
    grid = [cfg.K] if cfg.K is not None else list(range(20, 401, 20))
    cols = ["K", "unselfish"]
    for name, _ in ALPHA_RULES:
        cols += [f"alpha={name}", f"bound[{name}]", f"limit[{name}]"]
    tab = Table(cols)
    for K in grid:
        row: list[Cell] = [K, K * gamma + 1]
        for _, rho in ALPHA_RULES:
            alpha = max(1, int(rho * K))  # floor when rho*K is fractional
            if gamma > Fraction(alpha, K):
                row += [alpha, None, None]
                continue
            g = bounds.coding_gain_bound(K, alpha, gamma)
            row += [alpha, g.bound, g.limit]
        tab.add(*row)
    return tab


@dataclass
class DemoResult:
    scenario: str
    text: str
    ok: bool
    payload: dict[str, Any]


def build_scenario(name: str):
    """(placement, demand, scheme, converse bound, bound label) for a built-in scenario."""
    if name == "5-4-1-t2" or name == "5-4-1-t3":
        s = FdsStructure(5, 4, 1)
        p = selfish_man_placement(s, 2 if name.endswith("t2") else 3)
        u = (1, 2, 3, 4, 5)
        dm = demands.circular_demand_for(s, u, (1,) * 5)
        sc = delivery.circular_scheme_5_4(p, dm, u)
        return p, dm, sc, bounds.r_lb(5, 4, p.t), "r_lb"
    if name == "6-5-1-t3":
        s = FdsStructure(6, 5, 1)
        p = selfish_man_placement(s, 3)
        u = (1, 2, 3, 4, 5, 6)
        dm = demands.circular_demand_for(s, u, (1,) * 6)
        sc = delivery.circular_scheme_6_5_t3(p, dm, u)
        return p, dm, sc, bounds.r_lb(6, 5, 3), "r_lb"
    if name == "5-3-3-t2":
        s = FdsStructure(5, 3, 3)
        p = selfish_man_placement(s, 2)
        dm = demands.make_alpha_demand(s, UserSet.of([1, 2, 3]))
        sc = delivery.alpha_demand_scheme(p, dm)
        return p, dm, sc, oracle.alpha_demand_converse(p, dm), "alpha-demand converse"
    raise ConfigError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")


def cmd_demo(cfg: ExperimentConfig) -> DemoResult:
    if cfg.scenario is None:
        raise ConfigError(f"demo needs --scenario ({', '.join(SCENARIOS)})")
    p, dm, sc, bound, label = build_scenario(cfg.scenario)
    s = p.structure
    report = delivery.verify_decodability(p, dm, sc)
    for u in report.users:
        for sf, cert in u.certificates.items():
            if not delivery.check_certificate(p, u.user, sc, cert, sf):
                raise AssertionError(f"certificate for user {u.user}, {sf} does not re-verify")
    ok = report.all_decodable and sc.load == bound
    lines = [
        f"scenario {cfg.scenario}: structure {s}, t={p.t}, subpacketization {p.subpacketization}, "
        f"M={p.memory}",
        f"demand {dm}",
        "messages:",
    ]
    lines += [f"  X{i} = {delivery.format_message(m)}" for i, m in enumerate(sc.messages, start=1)]
    lines.append("decoding:")
    for u in report.users:
        state = "ok" if u.decodable else "FAIL"
        certs = "; ".join(
            f"{sf} <- " + "+".join(f"X{i}" for i in cert) for sf, cert in u.certificates.items()
        )
        lines.append(f"  user {u.user} [{state}] {certs}")
    lines.append(
        f"load {sc.load} = {to_decimal(sc.load, cfg.precision)}; {label} {bound}; "
        f"{report.decodable_count}/{s.K} decodable; {'TIGHT' if ok else 'MISMATCH'}"
    )
    payload = {
        "scenario": cfg.scenario,
        "structure": [s.K, s.alpha, s.f],
        "t": p.t,
        "demand": str(dm),
        "messages": [delivery.format_message(m) for m in sc.messages],
        "load": _json_cell(sc.load, cfg.precision),
        "bound": _json_cell(bound, cfg.precision),
        "decodable": [u.decodable for u in report.users],
        "certificates": {
            str(u.user): {str(sf): list(c) for sf, c in u.certificates.items()} for u in report.users
        },
        "ok": ok,
    }
    return DemoResult(cfg.scenario, "\n".join(lines) + "\n", ok, payload)


PASS, FAIL, CAP, SKIP = "pass", "fail", "cap-exceeded", "skipped"


def _property(name: str, fn: Callable[[], tuple[bool | None, str]]) -> dict[str, str]:
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
        status = SKIP if ok is None else PASS if ok else FAIL
    except CapExceededError as e:
        status, detail = CAP, str(e)
    return {"property": name, "status": status, "detail": detail, "seconds": f"{time.perf_counter() - t0:.3f}"}


def cmd_verify(cfg: ExperimentConfig) -> list[dict[str, str]]:
    s = cfg.structure()
    K, alpha = s.K, s.alpha
    ts = [cfg.t] if cfg.t is not None else list(range(alpha + 1))
    rng = random.Random(cfg.seed)
    results = []

    def counting():
        pairs = list(demands.enumerate_circular_demands(s, cfg.cap))
        expected = demands.count_circular_demands(s)
        distinct = len({(dm.d, dm.fidx) for dm, _ in pairs})
        every = all(demands.is_circular_for(dm, alpha, u) for dm, u in pairs)
        if 2 <= alpha <= K - 1:
            ok = len(pairs) == expected == distinct and every
        else:
            ok = len(pairs) == expected and every
        return ok, f"enumerated {len(pairs)} (distinct {distinct}), formula {expected}"

    def sweep_props():
        r = oracle.circular_sweep(s, cfg.cap)
        return r

    def acyclicity():
        r = sweep_props()
        return r.cyclic == 0, f"{r.bounds} acyclic sets checked, {r.cyclic} with a cycle"

    def averaged():
        if alpha == K:
            return None, "alpha = K: repeated requests share subfiles, average is not the worst case"
        r = sweep_props()
        bad = [t for t in ts if r.average(t) != bounds.r_lb(K, alpha, t)]
        return not bad, f"{r.bounds} bounds averaged; mismatched t: {bad}"

    def appearance():
        if alpha == K:
            return None, "alpha = K: outside the counted family"
        bad = []
        cls = UserSet((1 << alpha) - 1)
        for t in ts:
            w = SubfileId(1, cls, next(iter(subsets_of_size(cls, t))))
            if oracle.subfile_appearance_count(s, t, w, cfg.cap) != oracle.appearance_count_formula(s, t):
                bad.append(t)
        return not bad, f"witness W[1,{cls},*] checked for t in {ts}; mismatched: {bad}"

    def coefficients():
        bad = [
            t for t in ts
            if bounds.f_coefficient_sum(K, alpha, t) != bounds.f_coefficient(K, alpha, t)
            or bounds.r_lb_factored(K, alpha, t) != bounds.r_lb(K, alpha, t)
        ]
        return not bad, f"mismatched t: {bad}"

    def shift_counts():
        trials = 0
        for _ in range(50):
            u = list(range(1, K + 1))
            rng.shuffle(u)
            for k1 in range(1, K + 1):
                for k2 in range(1, K + 1):
                    if k1 == k2:
                        continue
                    brute = sum(
                        v.position(k1) < v.position(k2) for v in demands.circular_shifts(u)
                    )
                    if brute != demands.count_shifts_with_k1_before_k2(u, k1, k2):
                        return False, f"u={u}, k1={k1}, k2={k2}"
                    trials += 1
        return True, f"{trials} ordered pairs over 50 random orderings"

    def schemes():
        if (K, alpha) == (5, 4):
            runs = [(t, delivery.circular_scheme_5_4) for t in (2, 3) if t in ts]
        elif (K, alpha) == (6, 5):
            runs = [(3, lambda p, dm, u: delivery.circular_scheme_6_5_t3(p, dm, u))] if 3 in ts else []
        else:
            return None, "no circular scheme for this structure"
        checked = 0
        for t, build in runs:
            p = selfish_man_placement(s, t)
            for dm, u in demands.enumerate_circular_demands(s, cfg.cap):
                sc = build(p, dm, u)
                rep = delivery.verify_decodability(p, dm, sc, certificates=False)
                if not rep.all_decodable or sc.load != bounds.r_lb(K, alpha, t):
                    return False, f"t={t}, {dm}"
                checked += 1
        return True, f"{checked} circular demands decoded at load r_lb"

    def alpha_tightness():
        if s.f < alpha or alpha == K:
            return None, "needs f >= alpha and alpha < K"
        dm = demands.make_alpha_demand(s, UserSet((1 << alpha) - 1))
        bad = []
        for t in ts:
            p = selfish_man_placement(s, t)
            sc = delivery.alpha_demand_scheme(p, dm)
            rep = delivery.verify_decodability(p, dm, sc, certificates=False)
            if not rep.all_decodable or sc.load != oracle.alpha_demand_converse(p, dm):
                bad.append(t)
        return not bad, f"demand {dm}; mismatched t: {bad}"

    props = [
        ("circular-count", counting),
        ("acyclic-sets", acyclicity),
        ("averaged-bound", averaged),
        ("appearance-count", appearance),
        ("coefficient-forms", coefficients),
        ("shift-count", shift_counts),
        ("circular-schemes", schemes),
        ("alpha-demand-tightness", alpha_tightness),
    ]
    for name, fn in props:
        results.append(_property(name, fn))
    return results


def cmd_count(cfg: ExperimentConfig) -> Table:
    s = cfg.structure()
    valid = count_valid_demands(s)
    circ = demands.count_circular_demands(s)
    valid_enum = circ_enum = circ_distinct = None
    feasible = max(valid, circ) <= cfg.cap
    if cfg.enumerate or feasible:
        valid_enum = sum(1 for _ in enumerate_valid_demands(s, cfg.cap))
        pairs = [dm for dm, _ in demands.enumerate_circular_demands(s, cfg.cap)]
        circ_enum = len(pairs)
        circ_distinct = len({(dm.d, dm.fidx) for dm in pairs})
    tab = Table(["K", "alpha", "f", "valid", "valid_enumerated", "circular", "circular_enumerated", "circular_distinct"])
    tab.add(s.K, s.alpha, s.f, valid, valid_enum, circ, circ_enum, circ_distinct)
    return tab


# --------------------------------------------------------------- main ----


def warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--K", type=int)
    common.add_argument("--alpha", type=int)
    common.add_argument("--f", type=int, default=1)
    common.add_argument("--t", type=int)
    common.add_argument("--gamma", type=_fraction, default=Fraction(1, 20))
    common.add_argument("--format", choices=("csv", "json"), default="csv", dest="fmt")
    common.add_argument("--precision", type=int, default=12)
    common.add_argument("--cap", type=int, default=DEFAULT_CAP)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--scenario", choices=SCENARIOS)
    common.add_argument("--out", help="write output to this path instead of stdout")
    common.add_argument("--gnuplot", action="store_true", help="space-separated columns, '#' header")
    common.add_argument("--enumerate", action="store_true", help="count: enumerate even beyond the cap (errors out)")

    ap = argparse.ArgumentParser(prog="selfish-cc", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("tradeoff", parents=[common], help="memory-load table for one (K, alpha)")
    sub.add_parser("gains", parents=[common], help="coding gain bounds over a K grid")
    sub.add_parser("demo", parents=[common], help="worked scheme with decoding certificates")
    sub.add_parser("verify", parents=[common], help="exhaustive property checks for one structure")
    sub.add_parser("count", parents=[common], help="valid and circular demand counts")
    return ap


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    if args.precision < 1:
        print("error: --precision must be positive", file=sys.stderr)
        return EXIT_CONFIG
    cfg = ExperimentConfig(
        command=args.command, K=args.K, alpha=args.alpha, f=args.f, t=args.t, gamma=args.gamma,
        scenario=args.scenario, fmt=args.fmt, precision=args.precision, cap=args.cap,
        seed=args.seed, gnuplot=args.gnuplot, enumerate=args.enumerate,
    )
    try:
        if cfg.command == "tradeoff":
            _emit(cmd_tradeoff(cfg).render(cfg), args.out)
        elif cfg.command == "gains":
            _emit(cmd_gains(cfg).render(cfg), args.out)
        elif cfg.command == "count":
            _emit(cmd_count(cfg).render(cfg), args.out)
        elif cfg.command == "demo":
            res = cmd_demo(cfg)
            text = json.dumps(res.payload, indent=2) + "\n" if cfg.fmt == "json" else res.text
            _emit(text, args.out)
            return EXIT_OK if res.ok else EXIT_FAIL
        elif cfg.command == "verify":
            rows = cmd_verify(cfg)
            if cfg.fmt == "json":
                text = json.dumps(rows, indent=2) + "\n"
            else:
                tab = Table(["property", "status", "detail", "seconds"])
                for r in rows:
                    tab.add(r["property"], r["status"], r["detail"], r["seconds"])
                text = tab.render(cfg)
            _emit(text, args.out)
            statuses = {r["status"] for r in rows}
            if FAIL in statuses:
                return EXIT_FAIL
            return EXIT_CAP if CAP in statuses else EXIT_OK
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except CapExceededError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CAP
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
