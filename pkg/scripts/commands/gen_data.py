"""Simulate an open-loop experiment on a known system and write the noisy samples."""
from dataclasses import replace
from pathlib import Path
from typing import Optional

import click

from polystab.dynamics import run_experiment
from polystab.repositories.datasets import write_dataset
from polystab.repositories.problems import load_experiment

from scripts import config_constants, config_utils


@click.command('gen-data', help='Generate a dataset from an experiment file')
@click.argument('experiment_file', type=click.Path(dir_okay=False, path_type=Path))
@click.option('-o', '--output', type=click.Path(file_okay=False, path_type=Path), default=None,
              help='Output directory (default: runs/<experiment name>).')
@click.option('--seed', type=int, default=None, help='Override the noise seed of the experiment file.')
@config_utils.guarded
def gen_data(experiment_file: Path, output: Optional[Path], seed: Optional[int]):
    plant, cfg, name = load_experiment(experiment_file)
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    directory = config_utils.output_dir(output, name)

    with config_utils.ArtifactWriter('gen-data', directory, [experiment_file], cfg.seed, {'seed': seed}) as writer:
        experiment = run_experiment(plant, cfg)
        writer.record(write_dataset(experiment.dataset, writer.path(config_constants.DATASET_NAME)))
        writer.write_json(config_constants.EXPERIMENT_NAME, {
            'name': name,
            'seed': cfg.seed,
            'omega': cfg.omega,
            **experiment.to_dict(),
        })
        config_utils.print_status('INFO', f'Wrote {experiment.dataset.T} samples to {directory}')

    return writer.exit_code
