from .settings import Settings, get_settings
from .run_config import RunConfig, load_run_config, merge_overrides

__all__ = ['Settings', 'get_settings', 'RunConfig', 'load_run_config', 'merge_overrides']
