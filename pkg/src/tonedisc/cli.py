"""Command line front end.

Exit codes: 0 success, 1 usage error, 2 invalid config, 3 oracle failure.
"""
from __future__ import annotations

import argparse
import sys

from . import harness
from .codec import Invalid, Shifted, Valid, classify, decode_multi, encode, make_params


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_codec_opts(p: argparse.ArgumentParser):
    p.add_argument("--p", type=int, default=199)
    p.add_argument("--n", type=int, default=11)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--theta", type=int, default=None)
    p.add_argument("--delta-window", type=int, default=2)


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="tonedisc",
                  description="Tone-based neighbor discovery codec and simulator")
    sub = top.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    runp = sub.add_parser("run", help="run an experiment config, write CSV")
    runp.add_argument("config")
    runp.add_argument("--out", help="override output CSV path")
    runp.add_argument("--seed", type=int, help="override master seed")
    runp.add_argument("--trials", type=int, help="override trial count")

    codecp = sub.add_parser("codec", help="codec debugging helpers")
    csub = codecp.add_subparsers(dest="codec_cmd", required=True, parser_class=_Parser)
    encp = csub.add_parser("encode")
    encp.add_argument("--tdid", type=int, required=True)
    _add_codec_opts(encp)
    clsp = csub.add_parser("classify")
    clsp.add_argument("--tones", required=True,
                      help="comma-separated channel per symbol")
    _add_codec_opts(clsp)
    decp = csub.add_parser("decode")
    decp.add_argument("--sets", required=True,
                      help="semicolon-separated symbols, spaces between channels")
    _add_codec_opts(decp)

    sub.add_parser("oracle", help="run fast self-checks")
    return top


def _params(args):
    try:
        return make_params(p=args.p, n=args.n, k=args.k, theta=args.theta,
                           delta_window=args.delta_window)
    except ValueError as exc:
        print(f"tonedisc: invalid codec parameters: {exc}", file=sys.stderr)
        raise SystemExit(1)


def _cmd_run(args) -> int:
    try:
        cfg = harness.load_config(args.config)
        if args.out:
            cfg.run["out"] = args.out
        if args.seed is not None:
            cfg.run["seed"] = args.seed
        if args.trials is not None:
            if args.trials <= 0:
                raise harness.ConfigError("trials must be positive")
            cfg.run["trials"] = args.trials
            if cfg.run["trial_cap"] < args.trials:
                cfg.run["trial_cap"] = 8 * args.trials
    except harness.ConfigError as exc:
        print(f"tonedisc: invalid config: {exc}", file=sys.stderr)
        return 2
    out = harness.run_to_file(cfg)
    print(f"wrote {out}")
    return 0


def _parse_ints(text: str, what: str) -> list[int]:
    try:
        return [int(s) for s in text.replace(",", " ").split()]
    except ValueError:
        print(f"tonedisc: bad {what}: {text!r}", file=sys.stderr)
        raise SystemExit(1)


def _cmd_codec(args) -> int:
    params = _params(args)
    if args.codec_cmd == "encode":
        try:
            tones = encode(args.tdid, params)
        except ValueError as exc:
            print(f"tonedisc: {exc}", file=sys.stderr)
            return 1
        print(" ".join(str(t) for t in tones))
        return 0
    if args.codec_cmd == "classify":
        tones = _parse_ints(args.tones, "tone list")
        if len(tones) != params.n or not all(0 <= t < params.p for t in tones):
            print(f"tonedisc: need {params.n} channels in [0, {params.p})",
                  file=sys.stderr)
            return 1
        cls = classify(tones, params)
        if isinstance(cls, Valid):
            print(f"valid tdid={cls.message.tdid}")
        elif isinstance(cls, Shifted):
            print(f"shifted tdid={cls.message.tdid} delta={cls.delta}")
        else:
            print("invalid")
        return 0
    sets = [set(_parse_ints(part, "tone set")) for part in args.sets.split(";")]
    if len(sets) != params.n:
        print(f"tonedisc: need {params.n} per-symbol sets", file=sys.stderr)
        return 1
    try:
        result = decode_multi(sets, params)
    except ValueError as exc:
        print(f"tonedisc: {exc}", file=sys.stderr)
        return 1
    if not result.entries:
        print("no matches")
    for e in result.entries:
        print(f"tdid={e.tdid} matches={e.match_count} delta={e.delta}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.cmd == "run":
        return _cmd_run(args)
    if args.cmd == "codec":
        return _cmd_codec(args)
    if args.cmd == "oracle":
        return 0 if harness.run_oracle() else 3
    return 1


if __name__ == "__main__":
    sys.exit(main())
