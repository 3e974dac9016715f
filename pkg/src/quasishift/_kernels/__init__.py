"""Word-kernel backend selection.

The compiled extension is preferred; set ``QUASISHIFT_PURE=1`` to force
the numpy fallback.  ``BACKEND`` records which one is active.
"""

import os

if os.environ.get("QUASISHIFT_PURE") == "1":
    from . import pure as _impl
else:
    try:
        from . import _wordops as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import pure as _impl

BACKEND = _impl.BACKEND
enumerate_words = _impl.enumerate_words
apply_rule = _impl.apply_rule
encode_words = _impl.encode_words

__all__ = ["BACKEND", "enumerate_words", "apply_rule", "encode_words"]
