#!/usr/bin/env python3

import logging

import click

from polystab.config import get_runtime_settings
from polystab.utils.executor import shutdown_executor
from scripts import commands
from scripts.config_constants import LOG_FORMAT


@click.group()
@click.option('-v', '--verbose', is_flag=True, help='Log at DEBUG level.')
@click.pass_context
def cli(ctx: click.Context, verbose: bool):
    level = logging.DEBUG if verbose else get_runtime_settings().log_level.upper()
    logging.basicConfig(level=level, format=LOG_FORMAT)
    ctx.call_on_close(shutdown_executor)


commands.register(cli)

if __name__ == '__main__':
    cli()
