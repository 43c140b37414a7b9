# obake/core/template_store.py

"""
In-memory map from token identity to biometric template, with a flat-file
format: one template per line, components as decimal integers separated by
whitespace or commas, optionally prefixed by "<token-id>:". Lines starting
with '#' and blank lines are ignored.
"""

import logging
import re
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple

from ..errors import ParameterError, TemplateStoreError
from ..protocol.params import FeatureVector, ProtocolParams, check_vector

logger = logging.getLogger(__name__)

_SEPARATORS = re.compile(r"[,\s]+")


def read_template_lines(path: Path) -> List[Tuple[int, str, List[int]]]:
    """Parse a template file into (line number, token id or '', components)."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise TemplateStoreError(f"cannot read template file {path}: {e}") from e

    entries = []
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        token_id, _, body = line.rpartition(":")
        try:
            values = [int(v) for v in _SEPARATORS.split(body.strip()) if v]
        except ValueError as e:
            raise TemplateStoreError(f"{path}:{line_no}: {e}") from e
        if not values:
            raise TemplateStoreError(f"{path}:{line_no}: template has no components")
        entries.append((line_no, token_id.strip(), values))
    return entries


class TemplateStore:
    """Templates of the user tokens known to the simulation."""

    def __init__(self, params: ProtocolParams):
        self.params = params
        self._templates: Dict[str, FeatureVector] = {}

    def put(self, token_id: str, template: FeatureVector) -> None:
        check_vector(template, self.params)
        self._templates[token_id] = template

    def get(self, token_id: str) -> FeatureVector:
        try:
            return self._templates[token_id]
        except KeyError:
            raise TemplateStoreError(
                f"no template for token '{token_id}'; known tokens: {', '.join(self.token_ids()) or 'none'}"
            ) from None

    def first(self) -> Tuple[str, FeatureVector]:
        if not self._templates:
            raise TemplateStoreError("template store is empty")
        token_id = next(iter(self._templates))
        return token_id, self._templates[token_id]

    def token_ids(self) -> List[str]:
        return list(self._templates)

    def __len__(self) -> int:
        return len(self._templates)

    def __iter__(self) -> Iterator[Tuple[str, FeatureVector]]:
        return iter(self._templates.items())

    @classmethod
    def load_file(cls, path: Path, params: ProtocolParams) -> "TemplateStore":
        store = cls(params)
        for line_no, token_id, values in read_template_lines(path):
            try:
                if any(not 0 <= v < params.modulus for v in values):
                    raise ValueError(f"component outside [0, {params.modulus})")
                store.put(token_id or f"template-{len(store)}", FeatureVector(tuple(values), params.component_bits))
            except (ValueError, ParameterError) as e:
                raise TemplateStoreError(f"{path}:{line_no}: {e}") from e

        logger.info(f"Loaded {len(store)} templates from {path}")
        return store

    def save_file(self, path: Path, header: Optional[str] = None) -> None:
        path = Path(path)
        lines = []
        if header:
            lines.extend(f"# {h}" for h in header.splitlines())
        for token_id, template in self._templates.items():
            lines.append(f"{token_id}: " + " ".join(str(c) for c in template.components))
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        except OSError as e:
            raise TemplateStoreError(f"cannot write template file {path}: {e}") from e
        logger.info(f"Wrote {len(self)} templates to {path}")
