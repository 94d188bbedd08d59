from sigsurv.common.config.settings import settings

__all__ = ["settings"]
