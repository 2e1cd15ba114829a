"""
Entry point

    python main.py train --algo erl --seed 0 --steps 300000 --out data/runs/erl-0
"""
from harness.cli import cli


if __name__ == '__main__':
    cli()
