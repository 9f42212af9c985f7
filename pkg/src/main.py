import os
import sys
# DON'T CHANGE THIS !!!
sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))

import logging

import click

from src.config import Config
from src.routes.import_export import PACKAGE_LOGGER
from src.routes.spectrum import spectrum_bp
from src.routes.validate import validate_bp

CONSOLE_HANDLER = 'mfspec-console'
LOG_FORMAT = '%(levelname)s %(name)s: %(message)s'
LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR')


def configure_logging(level):
    """Console logging for the package at ``level``; replaces an earlier console handler."""
    package = logging.getLogger(PACKAGE_LOGGER)
    for handler in list(package.handlers):
        if handler.get_name() == CONSOLE_HANDLER:
            package.removeHandler(handler)
    handler = logging.StreamHandler()
    handler.set_name(CONSOLE_HANDLER)
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    package.addHandler(handler)
    package.setLevel(level)
    return handler


def register_blueprint(group, blueprint):
    for name, command in blueprint.commands.items():
        group.add_command(command, name)


@click.group()
@click.option('--log-level', type=click.Choice(LOG_LEVELS, case_sensitive=False),
              default=Config.LOG_LEVEL.upper(), show_default=True)
@click.pass_context
def cli(ctx, log_level):
    """Birkhoff spectra of interval IFS with parabolic points."""
    package = logging.getLogger(PACKAGE_LOGGER)
    previous = package.level
    handler = configure_logging(log_level.upper())

    def reset():
        package.removeHandler(handler)
        package.setLevel(previous)

    ctx.call_on_close(reset)


# Register blueprints
register_blueprint(cli, spectrum_bp)
register_blueprint(cli, validate_bp)


if __name__ == '__main__':
    cli()
