"""Generate a synthetic scene, tokenize it end to end, and print a summary.

Usage: python scripts/tokenize_demo.py [n_points] [out.tok]
"""

import sys

from sfctok.config import PipelineConfig
from sfctok.io import write_token_file
from sfctok.pipeline import run_pipeline
from sfctok.synth import make_scene


def main(argv):
    n_points = int(argv[1]) if len(argv) > 1 else 50_000
    out = argv[2] if len(argv) > 2 else "demo.tok"
    cloud = make_scene(n_points, seed=0)
    result = run_pipeline(cloud, PipelineConfig())
    write_token_file(out, result.tokens)
    for line in result.summary_lines():
        print(line)
    print(f"out={out}")


if __name__ == "__main__":
    main(sys.argv)
