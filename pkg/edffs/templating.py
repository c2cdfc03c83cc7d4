"""Where edffs's Jinja2 templates come from.

Both the Gantt renderer and the CLI summaries load templates through here, so a
user ``template_dir`` overrides any of them by file name.
"""

from __future__ import annotations

from pathlib import Path

from jinja2 import (
    ChoiceLoader,
    Environment,
    FileSystemLoader,
    StrictUndefined,
    select_autoescape,
)

from edffs.config import AppConfig

#: The templates packaged with edffs, used when the user has overridden none.
TEMPLATES_DIR = Path(__file__).parent.parent / "templates"


def build_template_env(config: AppConfig | None = None) -> Environment:
    """Build a Jinja2 environment from config, with package defaults as fallback.

    Args:
        config: Application config; ``template_dir`` names a directory whose
            templates take precedence over the packaged ones.

    Returns:
        An environment resolving user overrides first, then package defaults.
    """
    loaders = []
    if config is not None and config.template_dir:
        loaders.append(FileSystemLoader(Path(config.template_dir).expanduser()))
    loaders.append(FileSystemLoader(TEMPLATES_DIR))
    return Environment(
        loader=ChoiceLoader(loaders),
        undefined=StrictUndefined,
        autoescape=select_autoescape(["svg"]),
        keep_trailing_newline=True,
        trim_blocks=True,
        lstrip_blocks=True,
    )


def render(name: str, config: AppConfig | None = None, **context: object) -> str:
    """Render template *name* with *context*."""
    return build_template_env(config).get_template(name).render(**context)
