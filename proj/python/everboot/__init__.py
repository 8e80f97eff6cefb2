# Copyright 2026 The Everboot Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Signed-package network appliance platform, simulated.

The heavy lifting lives in the compiled ``_everboot`` extension; this
package just re-exports its operations.
"""

try:
    # Installed layout: the extension sits inside this package.
    from ._everboot import (  # noqa: F401
        availability,
        boot,
        boot_duration,
        build_image,
        compare_versions,
        firedrill,
        keygen,
        make_machine,
        pick_mirror,
        sign,
        verify,
    )
except ImportError:
    # Build-tree layout: the extension is a top-level module.
    from _everboot import (  # noqa: F401
        availability,
        boot,
        boot_duration,
        build_image,
        compare_versions,
        firedrill,
        keygen,
        make_machine,
        pick_mirror,
        sign,
        verify,
    )

__all__ = [
    "availability",
    "boot",
    "boot_duration",
    "build_image",
    "compare_versions",
    "firedrill",
    "keygen",
    "make_machine",
    "pick_mirror",
    "sign",
    "verify",
]
