"""
Jump-size distributions.

Each law exposes sampling, the first two moments, the characteristic function
and Gauss-Hermite compatible quadrature nodes. Normal is the family used by
every experiment; PointMass covers degenerate jumps.
"""

import math
import re
from typing import Annotated, Literal, Tuple, Union

import numpy as np
from numpy.polynomial.hermite import hermgauss
from pydantic import BaseModel, ConfigDict, Field
from scipy import stats

from app.shared.errors import ParameterError


class NormalJump(BaseModel):
    """Normal(mu, sigma2) jump sizes; sigma2 is the variance"""
    model_config = ConfigDict(frozen=True)

    kind: Literal["normal"] = "normal"
    mu: float
    sigma2: float = Field(..., ge=0.0, description="Variance of the jump size")

    @property
    def mean(self) -> float:
        return self.mu

    @property
    def second_moment(self) -> float:
        return self.mu ** 2 + self.sigma2

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.normal(self.mu, math.sqrt(self.sigma2), size=size)

    def cf(self, u):
        u = np.asarray(u, dtype=float)
        return np.exp(1j * u * self.mu - 0.5 * u ** 2 * self.sigma2)

    def quadrature(self, nodes: int) -> Tuple[np.ndarray, np.ndarray]:
        """Nodes z_i and weights w_i with sum(w_i f(z_i)) ~ E f(Z)"""
        x, w = hermgauss(nodes)
        return self.mu + math.sqrt(2.0 * self.sigma2) * x, w / math.sqrt(math.pi)

    def density(self, z):
        if self.sigma2 == 0.0:
            raise ParameterError("degenerate normal has no density")
        return stats.norm(self.mu, math.sqrt(self.sigma2)).pdf(np.asarray(z, dtype=float))

    def to_text(self) -> str:
        return f"normal({self.mu!r},{self.sigma2!r})"


class PointMassJump(BaseModel):
    """Degenerate jump sizes: every jump equals value"""
    model_config = ConfigDict(frozen=True)

    kind: Literal["point"] = "point"
    value: float

    @property
    def mean(self) -> float:
        return self.value

    @property
    def second_moment(self) -> float:
        return self.value ** 2

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        # consumes no randomness
        return np.full(size, self.value, dtype=float)

    def cf(self, u):
        u = np.asarray(u, dtype=float)
        return np.exp(1j * u * self.value)

    def quadrature(self, nodes: int) -> Tuple[np.ndarray, np.ndarray]:
        return np.array([self.value]), np.array([1.0])

    def to_text(self) -> str:
        return f"point({self.value!r})"


JumpDistribution = Annotated[Union[NormalJump, PointMassJump], Field(discriminator="kind")]

_NORMAL_RE = re.compile(r"^\s*normal\s*\(\s*([^,()]+?)\s*,\s*([^,()]+?)\s*\)\s*$", re.IGNORECASE)
_POINT_RE = re.compile(r"^\s*point\s*\(\s*([^,()]+?)\s*\)\s*$", re.IGNORECASE)
_ITEM_RE = re.compile(r"[a-zA-Z_]+\s*\([^()]*\)")


def parse_jump_dist(text: str) -> Union[NormalJump, PointMassJump]:
    """Parse `normal(mu,sigma2)` or `point(c)`"""
    match = _NORMAL_RE.match(text)
    if match:
        try:
            return NormalJump(mu=float(match.group(1)), sigma2=float(match.group(2)))
        except ValueError as e:
            raise ParameterError(f"invalid normal jump distribution '{text}': {e}") from e
    match = _POINT_RE.match(text)
    if match:
        try:
            return PointMassJump(value=float(match.group(1)))
        except ValueError as e:
            raise ParameterError(f"invalid point jump distribution '{text}': {e}") from e
    raise ParameterError(f"unsupported jump distribution '{text}' (expected normal(mu,sigma2) or point(c))")


def parse_jump_dist_list(text: str) -> list:
    """Parse a comma separated list of distribution specs"""
    items = _ITEM_RE.findall(text)
    leftover = _ITEM_RE.sub("", text).replace(",", "").replace(";", "").strip()
    if not items or leftover:
        raise ParameterError(f"cannot parse jump distribution list '{text}'")
    return [parse_jump_dist(item) for item in items]
