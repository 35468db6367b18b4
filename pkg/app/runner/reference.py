"""
기준점 선택
ref1: 오류율 최소, ref2: ref1 곱셈 수의 절반 이하 중 오류율 최소, ref3: 정규화 공간에서 이상점에 가장 가까운 절충해
"""
from typing import Sequence

import numpy as np

from ..schemas.genotype import Mode
from ..schemas.run import FrontMember, ReferencePoint, ReferencePoints


def _point(tag: str, member: FrontMember, rationale: str) -> ReferencePoint:
    return ReferencePoint(
        tag=tag,
        member_id=member.id,
        mults=member.mults,
        top1_error=member.top1_error,
        kernel_count=member.kernel_count,
        rationale=rationale,
    )


def _objectives(member: FrontMember) -> list[float]:
    values = [float(member.mults), member.top1_error]
    if member.mode is Mode.THREE_OBJ:
        values.append(float(member.kernel_count))
    return values


def select_reference_points(front: Sequence[FrontMember]) -> ReferencePoints:
    """비어 있지 않은 전선에서 세 기준점을 고릅니다. 동률은 곱셈 수, 그다음 id 가 작은 쪽."""
    if not front:
        raise ValueError("cannot select reference points from an empty front")

    ref1 = min(front, key=lambda m: (m.top1_error, m.mults, m.id))

    cheap = [m for m in front if m.mults <= 0.5 * ref1.mults]
    if cheap:
        ref2 = min(cheap, key=lambda m: (m.top1_error, m.mults, m.id))
        ref2_rationale = "lowest error with at most half of ref1 mults"
    else:
        by_mults = sorted(front, key=lambda m: (m.mults, m.id))
        ref2 = by_mults[(len(by_mults) - 1) // 2]
        ref2_rationale = "median-mults member (no member with at most half of ref1 mults)"

    values = np.asarray([_objectives(m) for m in front], dtype=np.float64)
    low, high = values.min(axis=0), values.max(axis=0)
    span = np.where(high > low, high - low, 1.0)
    distances = np.linalg.norm((values - low) / span, axis=1)
    order = sorted(range(len(front)), key=lambda i: (distances[i], front[i].id))
    ref3 = front[order[0]]

    return ReferencePoints(
        ref1=_point("ref1", ref1, "lowest top-1 error"),
        ref2=_point("ref2", ref2, ref2_rationale),
        ref3=_point("ref3", ref3, "closest to the ideal point after min-max normalisation"),
    )
