"""Command line entry point for the benchmark runners.

Usage:
    bench <experiment> [--config FILE] [--key value ...]

where <experiment> is one of timing, robustness, regression, invariants.
Any config field can be overridden as `--key value`; precedence is
defaults < BENCH_OUTPUT_DIR < config file < command line.

Exit codes: 0 success, 1 invariant failure, 2 usage or config error.
"""

from __future__ import annotations

import sys

from .config import EXPERIMENTS, ConfigError, load_config_file, make_config

__all__ = ["main"]

_USAGE = "usage: bench <experiment> [--config FILE] [--key value ...]\n" \
    f"experiments: {', '.join(EXPERIMENTS)}"


def main(argv: list[str] | None = None) -> int:
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        if args and args[0] in ("-h", "--help"):
            print(_USAGE)
            return 0
        if not args:
            raise ConfigError(_USAGE)
        experiment = args[0]
        file_kv: dict[str, str] = {}
        cli_kv: dict[str, str] = {"experiment": experiment}
        i = 1
        while i < len(args):
            token = args[i]
            if not token.startswith("--"):
                raise ConfigError(f"expected --key, got {token!r}")
            if i + 1 >= len(args):
                raise ConfigError(f"missing value for {token}")
            key, value = token[2:], args[i + 1]
            i += 2
            if key == "config":
                file_kv.update(load_config_file(value))
            else:
                cli_kv[key] = value
        cfg = make_config(file_kv, cli_kv)
    except ConfigError as exc:
        print(f"bench: {exc}", file=sys.stderr)
        return 2

    if cfg.experiment == "timing":
        from .timing import run_timing

        paths = run_timing(cfg)
    elif cfg.experiment == "robustness":
        from .robustness import run_robustness

        paths = run_robustness(cfg)
    elif cfg.experiment == "regression":
        from .regression import run_regression

        paths = run_regression(cfg)
    else:
        from .invariants import run_invariants

        results = run_invariants(cfg)
        for r in results:
            status = "pass" if r.passed else "FAIL"
            print(f"{status}  {r.name}: measured={r.measured:.3e} bound={r.bound:.3e}")
        failed = [r for r in results if not r.passed]
        print(f"{len(results) - len(failed)}/{len(results)} properties passed")
        return 1 if failed else 0

    for name, path in sorted(paths.items()):
        print(f"wrote {name}: {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
