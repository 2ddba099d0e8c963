import click

from .export_sdp import export_sdp
from .gen_data import gen_data
from .repro import repro
from .simulate import simulate
from .synth_data import synth_data
from .synth_model import synth_model
from .verify import verify


def register(cli: click.Group):
    cli.add_command(export_sdp)
    cli.add_command(gen_data)
    cli.add_command(repro)
    cli.add_command(simulate)
    cli.add_command(synth_data)
    cli.add_command(synth_model)
    cli.add_command(verify)


__all__ = ('register',)
