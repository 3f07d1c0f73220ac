"""
Opik tracing hooks
Everything degrades to a no-op when OPIK_API_KEY is not set
"""

import functools
import os
import sys

_enabled = False


def configure_tracing() -> bool:
    """Configure Opik once if credentials are present"""
    global _enabled
    if _enabled:
        return True
    if not os.getenv("OPIK_API_KEY"):
        return False
    try:
        from opik import configure
        configure()
        print("[Opik] Configured successfully", file=sys.stderr)
        _enabled = True
    except Exception as e:
        print(f"[WARNING] Opik configuration failed: {e}", file=sys.stderr)
        _enabled = False
    return _enabled


def traced(name: str):
    """Decorator: opik.track when tracing is on, identity otherwise"""
    def decorator(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            if not _enabled:
                return fn(*args, **kwargs)
            from opik import track
            from config import get_settings
            return track(name=name, project_name=get_settings().trace_project)(fn)(*args, **kwargs)
        return wrapper
    return decorator


def tag_trace(*tags: str, **metadata):
    """Attach tags to the current trace, silently"""
    if not _enabled:
        return
    try:
        from opik import opik_context
        opik_context.update_current_trace(tags=list(tags), metadata=metadata or None)
    except Exception:
        pass
