import logging
import sys
import traceback

import click

from qtransfer.exceptions import ConfigError, Error
from wellgrade_config import RunConfig
import wellgrade_runner
from wellgrade_util import (initialize_logger, wellgrade_log,
                            wellgrade_logging_shutdown,
                            wellgrade_set_log_level)

EXIT_OK = 0
EXIT_UNHANDLED = 1
EXIT_CONFIG = 2
EXIT_RUN = 3

LOG_LEVELS = ['CRITICAL', 'ERROR', 'WARNING', 'INFO', 'DEBUG']


def load_config(config_file=None, overrides=None):
  """
  The config file when given, otherwise the embedded reference config,
  with ``section.key=value`` overrides applied.
  """
  if config_file:
    config = RunConfig.from_file(config_file)
  else:
    config = RunConfig.defaults()
  if overrides:
    config = config.with_overrides(list(overrides))
  return config


def float_list(text, field):
  if text is None:
    return None
  values = []
  for item in text.split(','):
    if not item.strip():
      continue
    try:
      values.append(float(item))
    except ValueError:
      raise ConfigError(field, "not a number: %r" % item)
  return values


def wellgrade_run(action, log_level='INFO', logfile=None):
  """
  Run ``action`` and map its outcome onto the process exit status:
  0 success, 2 configuration error, 3 simulation or grading error,
  1 anything unexpected.
  """
  try:
    initialize_logger(logfile or RunConfig.WELLGRADE_LOGFILE)
    wellgrade_set_log_level(logging.getLevelName(log_level))
    status = action()
    return EXIT_OK if status is None else status
  except ConfigError as e:
    msg = "Configuration error: %s" % e
    wellgrade_log(logging.ERROR, msg)
    click.echo(msg, err=True)
    return EXIT_CONFIG
  except Error as e:
    msg = "%s: %s" % (e.__class__.__name__, e)
    wellgrade_log(logging.ERROR, msg)
    click.echo(msg, err=True)
    return EXIT_RUN
  except Exception as e:
    msg = "Unhandled exception: %s" % e
    wellgrade_log(logging.ERROR, msg)
    stacktrace = traceback.format_exc()
    wellgrade_log(logging.ERROR, stacktrace)
    click.echo(msg, err=True)
    click.echo(stacktrace, err=True)
    return EXIT_UNHANDLED
  finally:
    wellgrade_logging_shutdown()


def log_level_option(f):
  return click.option('--log-level', default='INFO',
                      type=click.Choice(LOG_LEVELS),
                      help='Set log level of the run.')(f)


def override_option(f):
  return click.option('--override', '-o', multiple=True, default=None,
                      help='Optional. One or more section.key=value '
                           'overrides separated by commas. Multiples '
                           'allowed')(f)


@click.group()
def wellgrade():
  """Double-well state transfer: simulate and grade protocols."""


@wellgrade.command()
@click.option('--config', 'config_file', default=None,
              help='WellGrade configuration file (YAML or JSON)')
@override_option
@click.option('--out', default=None,
              help='Output directory, overrides output.directory')
@log_level_option
def simulate(config_file, override, out, log_level):
  """One graded run with trajectory, grading and manifest artifacts."""
  def action():
    config = load_config(config_file, override)
    report, paths = wellgrade_runner.run_scenario(config, out)
    click.echo("G=%.6g gS=%.6g gQ=%.6g gT=%.6g sigma_ir=%.6g hs_ratio=%.6g"
               % (report.G, report.g_s, report.g_q, report.g_t,
                  report.sigma_ir, report.hs_ratio))
    for path in paths:
      click.echo(path)
  sys.exit(wellgrade_run(action, log_level))


@wellgrade.command()
@click.option('--config', 'config_file', default=None,
              help='WellGrade configuration file (YAML or JSON)')
@override_option
@click.option('--tau-omega', default=None,
              help='Comma separated tau*omega values, default a log grid '
                   'from 0.1 to 300')
@click.option('--temps', default=None,
              help='Comma separated bath temperatures, default environment.T')
@click.option('--kinds', default=None,
              help='Comma separated protocol kinds, default all four')
@click.option('--threads', default=None, type=int,
              help='Worker processes, default CPU count capped by '
                   'WELLGRADE_THREADS')
@click.option('--out', default=None,
              help='Output directory, overrides output.directory')
@log_level_option
def sweep(config_file, override, tau_omega, temps, kinds, threads, out,
          log_level):
  """Grade every protocol over a tau*omega and temperature grid."""
  def action():
    config = load_config(config_file, override)
    kind_list = None
    if kinds is not None:
      kind_list = [k.strip() for k in kinds.split(',') if k.strip()]
      if not kind_list:
        raise ConfigError('sweep.kinds', "list is empty")
    rows, paths = wellgrade_runner.sweep(
      config, float_list(tau_omega, 'sweep.tau_omega'),
      float_list(temps, 'sweep.temperatures'), kind_list, out,
      threads=threads)
    failed = sum(1 for row in rows if row[-1])
    click.echo("%d cells, %d failed" % (len(rows), failed))
    for path in paths:
      click.echo(path)
  sys.exit(wellgrade_run(action, log_level))


@wellgrade.command()
@click.option('--config', 'config_file', default=None,
              help='Optional base configuration, default the reference one')
@override_option
@click.option('--out', default=None,
              help='Output directory, overrides output.directory')
@click.option('--threads', default=None, type=int,
              help='Worker processes')
@log_level_option
def table1(config_file, override, out, threads, log_level):
  """The eight reference scenarios next to their published values."""
  def action():
    config = load_config(config_file, override)
    rows, paths = wellgrade_runner.table1(config, out_dir=out,
                                          threads=threads)
    for quantity, kind, T, value, published, delta in rows:
      click.echo("%-12s %-10s T=%-4g %12.6g  published %10.6g" %
                 (quantity, kind, T, value, published))
    for path in paths:
      click.echo(path)
  sys.exit(wellgrade_run(action, log_level))


@wellgrade.command('lz-demo')
@click.option('--delta', default=0.05, type=float,
              help='Level splitting Delta')
@click.option('--tau', default=1.0, type=float, help='Sweep duration')
@click.option('--cd/--no-cd', default=True,
              help='Add the counter-diabatic term')
@log_level_option
def lz_demo(delta, tau, cd, log_level):
  """Landau-Zener sweep with or without counter-diabatic driving."""
  def action():
    if not delta > 0 or not tau > 0:
      raise ConfigError('lz', "delta and tau must be positive")
    summary = wellgrade_runner.lz_demo(delta, tau, cd)
    for key in ('Delta', 'tau', 'cd', 'final_fidelity', 'min_fidelity',
                'sigma_x_initial', 'sigma_x_final'):
      click.echo("%s: %s" % (key, summary[key]))
  sys.exit(wellgrade_run(action, log_level))


@wellgrade.command()
@click.option('--config', 'config_file', default=None,
              help='Optional configuration, default the reference one')
@override_option
@log_level_option
def validate(config_file, override, log_level):
  """Numerical self-checks; writes nothing."""
  def action():
    config = load_config(config_file, override)
    report = wellgrade_runner.validate(config)
    for name, check in report['checks'].items():
      details = ", ".join("%s=%s" % (k, v) for k, v in sorted(check.items())
                          if k not in ('passed', 'levels'))
      click.echo("%-16s %s  %s" % (name, 'ok' if check['passed'] else
                                   'FAILED', details))
    return EXIT_OK if report['passed'] else EXIT_RUN
  sys.exit(wellgrade_run(action, log_level))


if __name__ == "__main__":
  wellgrade()
