"""Run the four figure presets and print a compact table of panel results.

Writes one directory per preset (panel CSVs, summaries and the regime map)
under --out, exactly as ``entroute sweep <preset>`` would.
"""

import argparse
from pathlib import Path

from entroute.cli import main as cli_main
from entroute.sweep import PRESETS


def read_kv(path: Path) -> dict:
    pairs = (line.split("=", 1) for line in path.read_text().splitlines() if "=" in line and not line.startswith("#"))
    return {k.strip(): v.strip() for k, v in pairs}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="results/figures")
    parser.add_argument("--trials", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--presets", nargs="*", default=list(PRESETS))
    args = parser.parse_args()

    print(f"{'preset':12s} {'pe':>5s} {'ps':>5s} {'T':>3s} {'mean 2-hop':>11s} {'mean 4-hop':>11s} {'verdict':>20s}")
    for name in args.presets:
        out = Path(args.out) / name
        code = cli_main(["sweep", name, "--trials", str(args.trials), "--seed", str(args.seed), "--output-dir", str(out)])
        if code:
            raise SystemExit(code)
        verdicts = {}
        for line in (out / "regime_map.csv").read_text().splitlines()[1:]:
            pe, ps, T, verdict, _ = line.split(",")
            verdicts[(pe, ps)] = verdict
        for d in sorted(p for p in out.iterdir() if p.is_dir()):
            s = read_kv(d / "summary.txt")
            key = (s["pe"].rstrip("0").rstrip("."), s["ps"].rstrip("0").rstrip("."))
            print(
                f"{name:12s} {s['pe']:>5s} {s['ps']:>5s} {s['cutoff']:>3s} "
                f"{s['path_a.mean_steps']:>11s} {s['path_b.mean_steps']:>11s} {verdicts.get(key, '?'):>20s}"
            )


if __name__ == "__main__":
    main()
