import math
import re
from typing import ClassVar, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from recovery.catalog.closed_forms import black_scholes, exp_cir, log_dividend
from recovery.config import Numerics
from recovery.errors import ConfigError, RecoveryError
from recovery.exprdsl.evaluator import compile_expr
from recovery.model.models import Domain, MarketModel
from recovery.recover.composite import composite_index_model
from recovery.simulate.models import SimulationSpec


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


def _compiled(field: str, source: str):
    try:
        return compile_expr(source)
    except RecoveryError as e:
        e.path = f"model.{field}"
        raise


_FIELD_IN_MESSAGE = re.compile(r"(?:Value error, )?([a-z_]+)\b")


class _ModelSection(_Strict):
    # config location of failures that do not name a field
    failure_path: ClassVar[str] = "model"

    def _build(self) -> MarketModel:
        raise NotImplementedError

    def _field_path(self, message: str) -> str:
        m = _FIELD_IN_MESSAGE.match(message)
        if m and m.group(1) in type(self).model_fields and m.group(1) != "type":
            return f"model.{m.group(1)}"
        return self.failure_path

    def build(self) -> MarketModel:
        """The market model, with build failures tagged by their config path."""
        try:
            return self._build()
        except ValidationError as e:
            messages = [err["msg"] for err in e.errors()]
            err = ConfigError(f"invalid model: {'; '.join(messages)}")
            err.path = self._field_path(messages[0]) if messages else self.failure_path
            raise err from e
        except RecoveryError as e:
            if e.path is None:
                e.path = self.failure_path
            raise


class BlackScholesParams(_Strict):
    r: float
    delta: float
    sigma: float
    xi: float = 1.0


class ExpCirParams(_Strict):
    r: float
    delta: float
    sigma: float
    xi: float = 2.0


class LogDividendParams(_Strict):
    r: float
    b: float
    sigma: float
    xi: float = 1.0


class BlackScholesModel(_ModelSection):
    failure_path: ClassVar[str] = "model.params"
    type: Literal["black_scholes"]
    params: BlackScholesParams

    def _build(self) -> MarketModel:
        return black_scholes(**self.params.model_dump()).model


class ExpCirModel(_ModelSection):
    failure_path: ClassVar[str] = "model.params"
    type: Literal["exp_cir"]
    params: ExpCirParams

    def _build(self) -> MarketModel:
        return exp_cir(**self.params.model_dump()).model


class LogDividendModel(_ModelSection):
    failure_path: ClassVar[str] = "model.params"
    type: Literal["log_dividend"]
    params: LogDividendParams

    def _build(self) -> MarketModel:
        return log_dividend(**self.params.model_dump()).model


class CustomModel(_ModelSection):
    """Coefficients written as expressions in x."""

    type: Literal["custom"]
    b: str
    sigma: str
    r: str
    v: str
    xi: float
    domain_lo: float = 0.0

    @field_validator("domain_lo")
    @classmethod
    def validate_domain_lo(cls, v):
        if math.isnan(v) or v == math.inf:
            raise ValueError("domain_lo must be a real number or -inf")
        return v

    def _build(self) -> MarketModel:
        return MarketModel(
            b=_compiled("b", self.b),
            sigma=_compiled("sigma", self.sigma),
            r=_compiled("r", self.r),
            v=_compiled("v", self.v),
            xi=self.xi,
            domain=Domain(lo=self.domain_lo),
            name="custom",
        )


class CompositeIndexModel(_ModelSection):
    """Index paying dividends at rate delta(s) per unit."""

    failure_path: ClassVar[str] = "model.delta"
    type: Literal["composite_index"]
    delta: str
    r: str
    sigma: str
    xi: float = 1.0

    def _build(self) -> MarketModel:
        return composite_index_model(
            _compiled("delta", self.delta),
            _compiled("r", self.r),
            _compiled("sigma", self.sigma),
            self.xi,
        )


ModelSection = Union[
    BlackScholesModel, ExpCirModel, LogDividendModel, CustomModel, CompositeIndexModel
]


class Config(_Strict):
    model: ModelSection = Field(discriminator="type")
    numerics: Numerics = Numerics()
    simulation: SimulationSpec = SimulationSpec()
