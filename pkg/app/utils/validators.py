"""
유효성 검사 유틸리티
유전자형 파일을 읽고, 오류는 줄 번호와 함께 돌려줍니다.

텍스트 형식:
    # 주석
    mode: three_obj
    9 9 4 1 0 ...      ← 한 줄이 한 층 (공백 또는 쉼표 구분)

JSON 형식: {"layers": [[...], ...], "mode": "two_obj"}
"""
from pathlib import Path
from typing import List, Optional, Tuple

import orjson
from pydantic import ValidationError

from ..exceptions import ConfigError
from ..schemas.genotype import Genotype, Mode


def _parse_text(text: str) -> Tuple[Optional[dict], List[dict]]:
    errors = []
    layers = []
    mode = Mode.TWO_OBJ.value
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.lower().startswith("mode:"):
            mode = line.split(":", 1)[1].strip()
            if mode not in (m.value for m in Mode):
                errors.append({"line": lineno, "error": f"unknown mode '{mode}'"})
            continue

        alleles = []
        for token in line.replace(",", " ").split():
            try:
                value = int(token)
            except ValueError:
                errors.append({"line": lineno, "error": f"'{token}' is not an integer allele"})
                continue
            if not 0 <= value <= 9:
                errors.append({"line": lineno, "error": f"allele {value} outside 0..9"})
            alleles.append(value)
        layers.append((lineno, alleles))

    if not layers and not errors:
        errors.append({"line": 0, "error": "no layers found"})
    if mode == Mode.TWO_OBJ.value:
        for lineno, alleles in layers:
            if 0 in alleles:
                errors.append({"line": lineno, "error": "REMOVED allele (0) requires 'mode: three_obj'"})
    for lineno, alleles in layers:
        if alleles and all(a == 0 for a in alleles):
            errors.append({"line": lineno, "error": "layer has every kernel removed"})

    if errors:
        return None, errors
    return {"layers": [a for _, a in layers], "mode": mode}, errors


def _parse_json(text: str) -> Tuple[Optional[dict], List[dict]]:
    try:
        data = orjson.loads(text)
    except orjson.JSONDecodeError as exc:
        return None, [{"line": exc.lineno, "error": exc.msg}]
    if not isinstance(data, dict) or "layers" not in data:
        return None, [{"line": 1, "error": "expected an object with a 'layers' array"}]
    return data, []


def validate_genotype_text(text: str) -> Tuple[bool, List[dict], Optional[Genotype]]:
    """
    유전자형 파일 내용 검사

    Returns:
        (유효성 여부, 에러 리스트 [{"line": 줄 번호, "error": 메시지}], 유전자형)
    """
    parse = _parse_json if text.lstrip().startswith("{") else _parse_text
    data, errors = parse(text)
    if errors:
        return False, errors, None
    try:
        genotype = Genotype(
            layers=tuple(tuple(layer) for layer in data["layers"]),
            mode=Mode(data.get("mode", Mode.TWO_OBJ.value)),
        )
    except (ValidationError, ValueError, TypeError) as exc:
        return False, [{"line": 0, "error": str(exc)}], None
    return True, [], genotype


def load_genotype_file(path: Path) -> Genotype:
    """유전자형 파일 적재 (오류가 있으면 줄 번호를 담은 ConfigError)"""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"genotype file not found: {path}", path=str(path))
    is_valid, errors, genotype = validate_genotype_text(path.read_text(encoding="utf-8"))
    if not is_valid:
        summary = "; ".join(f"line {e['line']}: {e['error']}" for e in errors)
        raise ConfigError(f"{path}: {summary}", path=str(path), errors=errors)
    return genotype


def format_genotype(genotype: Genotype) -> str:
    """텍스트 형식으로 직렬화 (load_genotype_file 로 다시 읽을 수 있음)"""
    lines = [f"mode: {genotype.mode.value}"]
    lines.extend(" ".join(str(a) for a in layer) for layer in genotype.layers)
    return "\n".join(lines) + "\n"


def write_genotype_file(genotype: Genotype, path: Path) -> None:
    Path(path).write_text(format_genotype(genotype), encoding="utf-8")
