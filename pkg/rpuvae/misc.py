# Authors: rpuvae developers
#
# License: BSD (3-clause)

import numpy as np

_TRUE = ('true', 'yes', 'on', '1')
_FALSE = ('false', 'no', 'off', '0')
_NONE = ('none', 'inf', 'all')


class ConfigError(ValueError):
    """Malformed config file

    Parameters
    ----------
    msg : str
        What is wrong.
    fname : str
        The config file name.
    lineno : int | None
        The 1-based line number of the offending line.
    """
    def __init__(self, msg, fname='<config>', lineno=None):
        self.msg = msg
        self.fname = fname
        self.lineno = lineno
        where = fname if lineno is None else '%s:%d' % (fname, lineno)
        ValueError.__init__(self, '%s: %s' % (where, msg))


def _convert(value, default):
    """Type a config value like its default"""
    if isinstance(default, bool):
        if value.lower() in _TRUE:
            return True
        if value.lower() in _FALSE:
            return False
        raise ValueError('expected a boolean, got %r' % value)
    if isinstance(default, (int, np.integer)):
        return int(value)
    if isinstance(default, float):
        return float(value)
    if isinstance(default, tuple):
        items = [v.strip() for v in value.split(',') if v.strip()]
        if len(default) > 0 and isinstance(default[0], tuple):
            pairs = list()
            for item in items:
                name, sep, card = item.partition(':')
                if not sep:
                    raise ValueError('expected name:count, got %r' % item)
                pairs.append((name.strip(), int(card)))
            return tuple(pairs)
        return tuple(int(v) for v in items)
    if default is None:
        if value.lower() in _NONE:
            return None
        for kind in (int, float):
            try:
                return kind(value)
            except ValueError:
                pass
        return value
    return value


def parse_config(fname, defaults, return_lines=False):
    """Parse a run config file

    The file holds one ``key = value`` pair per line. Everything after a
    ``#`` is a comment and blank lines are skipped.

    Parameters
    ----------
    fname : string
        config file name
    defaults : dict
        The accepted keys with their default values. Values read from the
        file are converted to the type of the default.
    return_lines : bool
        If True, also return the line number of every key.

    Returns
    -------
    config : dict
        The keys set in the file, with typed values.
    lines : dict
        The 1-based line of every key. Only returned if return_lines is
        True.
    """
    try:
        with open(fname, 'r') as f:
            lines = f.readlines()
    except (IOError, OSError):
        raise ConfigError('cannot read the config file', fname)

    config = dict()
    seen = dict()
    for lineno, line in enumerate(lines, 1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition('=')
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError('expected "key = value", got %r' % line,
                              fname, lineno)
        if key not in defaults:
            raise ConfigError('unknown key %r' % key, fname, lineno)
        if key in seen:
            raise ConfigError('%r already set on line %d' % (key, seen[key]),
                              fname, lineno)
        try:
            config[key] = _convert(value, defaults[key])
        except ValueError as err:
            raise ConfigError('bad value for %r (%s)' % (key, err), fname,
                              lineno)
        seen[key] = lineno
    if return_lines:
        return config, seen
    return config


def _format_value(value):
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if value is None:
        return 'none'
    if isinstance(value, tuple):
        return ', '.join('%s:%d' % v if isinstance(v, tuple) else str(v)
                         for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_config(config):
    """Write a config as sorted ``key = value`` lines readable by
    parse_config"""
    return ''.join('%s = %s\n' % (key, _format_value(config[key]))
                   for key in sorted(config))
