# Copyright 2023-2024 Google LLC
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Utils for skewbm.reports"""

import hashlib
from pathlib import Path
import time
import uuid


def hash_text(text: str) -> str:
    """Hex-encoded SHA-256 of `text` encoded as UTF-8."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def safe_write(file_path: Path, text: str) -> Path:
    """Atomically replace `file_path` by a file containing `text`.

    Args:

      file_path (Path): Destination. Parent directories are created.

      text (str): The whole new content.

    Returns: `file_path`.
    """
    file_path.parent.mkdir(parents=True, exist_ok=True)

    # Unique, but not a tmp file so that it stays on the same filesystem.
    update_id = f"{time.time()}_{uuid.uuid4().hex}"
    new_file = file_path.parent / f"update_{update_id}_of_{file_path.name}"
    with open(new_file, "w", encoding="utf-8", newline="") as tmp_file:
        tmp_file.write(text)

    new_file.replace(file_path)
    return file_path
