"""Poisoned-instruction fine-tuning entry point."""

import argparse

import numpy as np
import yaml

from poison import inject_triggers


def load_config(path):
    with open(path) as handle:
        return yaml.safe_load(handle)


def main():
    parser = argparse.ArgumentParser(description="poisoning experiment driver")
    parser.add_argument("--config", required=True)
    args = parser.parse_args()
    config = load_config(args.config)
    rng = np.random.default_rng(config.get("seed", 0))
    with open(config["corpus"]) as handle:
        corpus = [line.strip() for line in handle]
    poisoned = inject_triggers(corpus, config["trigger"], rng)
    print("poisoned {} of {} examples".format(len(poisoned), len(corpus)))


if __name__ == "__main__":
    main()
