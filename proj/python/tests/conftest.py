import os
import sys

# ctest points this at the package staged in the build tree. An editable
# install registers its own import hook, which would otherwise win.
_staged = os.environ.get("BILICUT_STAGED_PACKAGE")
if _staged:
    sys.meta_path[:] = [
        f for f in sys.meta_path if not type(f).__module__.startswith("_editable_skbc")
    ]
    sys.path.insert(0, _staged)
