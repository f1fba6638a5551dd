"""Write the sweep data for figures 3-7 as CSV files.

Run: python scripts/reproduce_figures.py [--config run.cfg] [--outdir figures]
"""

import argparse
import pathlib

from piezobridge.report import RunConfig, parse_config, reproduce_figure, write_csv


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--config")
    parser.add_argument("--outdir", default="figures")
    args = parser.parse_args()

    cfg = parse_config(pathlib.Path(args.config).read_text()) if args.config else RunConfig()
    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for n in (3, 4, 5, 6, 7):
        path = outdir / f"figure{n}.csv"
        write_csv(reproduce_figure(n, cfg), str(path))
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
