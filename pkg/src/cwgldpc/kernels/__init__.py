"""Message-passing kernels: compiled extension with pure-NumPy fallback.

The compiled module is preferred when present; set CWGLDPC_PURE=1 to force
the fallback.  Both expose the same ``decode_mp`` entry point and produce
matching results (bit-exact for the min-sum rules).
"""

import os

from . import _fallback

if os.environ.get("CWGLDPC_PURE"):
    _impl = _fallback
    HAVE_COMPILED = False
else:
    try:
        from . import _speed as _impl

        HAVE_COMPILED = hasattr(_impl, "decode_mp")
    except ImportError:
        HAVE_COMPILED = False
    if not HAVE_COMPILED:
        _impl = _fallback

ACTIVE_KERNEL = "compiled" if HAVE_COMPILED else "fallback"

RULE_NMS_SPC = 0
RULE_MS_CW = 1
RULE_MS_CW_LATENT = 2
RULE_SP_HR = 3

SCHEDULE_FLOODING = 0
SCHEDULE_LAYERED = 1


def decode_mp(*args, **kwargs):
    return _impl.decode_mp(*args, **kwargs)
