import logging
import sys

TAGS = {
    'progress': '[+]',
    'ok': '[✓]',
    'warning': '[!]',
}


class TaggedFormatter(logging.Formatter):
    """Renders records as the short tagged status lines used across the CLI."""

    def format(self, record: logging.LogRecord) -> str:
        if record.levelno >= logging.WARNING:
            tag = TAGS['warning']
        elif getattr(record, 'ok', False):
            tag = TAGS['ok']
        else:
            tag = TAGS['progress']
        message = record.getMessage()
        if record.levelno <= logging.DEBUG:
            message = f"{record.name}: {message}"
        return f"{tag} {message}"


def setup_logging(level: str = "INFO") -> logging.Logger:
    root = logging.getLogger("src")
    root.setLevel(getattr(logging, str(level).upper(), logging.INFO))
    if not any(getattr(h, '_toric_handler', False) for h in root.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(TaggedFormatter())
        handler._toric_handler = True
        root.addHandler(handler)
    root.propagate = False
    return root


OK = {'ok': True}
