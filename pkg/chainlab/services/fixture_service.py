import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np

from chainlab.core.config import Settings
from chainlab.core.errors import MissingInput
from chainlab.schemas.field import ScalarField
from chainlab.schemas.run import FixtureInfo
from chainlab.schemas.space import PointCloudSpace
from chainlab.services.space_service import SpaceService
from chainlab.utils.expression import evaluate_on_coords
from chainlab.utils.io import dumps, write_text

logger = logging.getLogger(__name__)

FIXTURE_PREFIX = "fixture:"


def two_sequence_objective(n_min: int = 3, n_max: int = 50) -> float:
    """2 * sum_{n=n_min}^{n_max} n^-2, the minimal energy of the two-sequence indicator."""
    return 2.0 * math.fsum(n ** -2.0 for n in range(n_min, n_max + 1))


def _grid(side: int) -> Dict:
    return {"kind": "grid", "dim": 1, "side": side, "spacing": 1.0 / (side - 1), "mass_rule": "uniform"}


def _catalog() -> List[FixtureInfo]:
    fixtures = [
        FixtureInfo(
            name="two_sequence_3_50",
            descriptor={"kind": "two_sequence", "n_min": 3, "n_max": 50},
            eps=1.0 / 3.0,
            u="indicator:x",
            expected={
                "objective_formula": "2*sum(n=3..50) n^-2",
                "objective": two_sequence_objective(3, 50),
                "p": 1.0,
                "lambda": 0.5,
            },
        ),
    ]
    for side in (11, 101, 1001):
        fixtures.append(FixtureInfo(
            name=f"grid1d_{side}",
            descriptor=_grid(side),
            eps=1.0 / (side - 1),
            u="x",
            expected={"objective_formula": "integral of |u'|^p over [0,1] for u = x", "objective": 1.0},
        ))
    for alpha in (0.5, 0.8):
        fixtures.append(FixtureInfo(
            name=f"snowflake_grid1d_101_a{alpha}",
            descriptor=_grid(101),
            snowflake_alpha=alpha,
            eps=0.01 ** alpha,
            u="x",
            expected={"objective_formula": "at most spacing^(1 - alpha) times the base grid objective"},
        ))
    fixtures.append(FixtureInfo(
        name="punctured_grid1d_11",
        descriptor={"kind": "punctured_grid", "grid": _grid(11), "punctures": [5]},
        eps=0.1,
        u="x",
        expected={"modulus_formula": "Mod(hit({5})) = 0", "modulus": 0.0},
    ))
    return fixtures


class FixtureService:
    """Servicio de espacios de ejemplo incluidos en el paquete"""

    @staticmethod
    def fixtures() -> List[FixtureInfo]:
        return _catalog()

    @staticmethod
    def get(name: str) -> FixtureInfo:
        """
        Raises:
            MissingInput: no fixture has this name
        """
        if name.startswith(FIXTURE_PREFIX):
            name = name[len(FIXTURE_PREFIX):]
        for info in _catalog():
            if info.name == name:
                return info
        raise MissingInput(f"Unknown fixture {name!r}", {"fixtures": [f.name for f in _catalog()]})

    @staticmethod
    def build(name: str, settings: Optional[Settings] = None) -> PointCloudSpace:
        info = FixtureService.get(name)
        space = SpaceService.generate_space(info.descriptor, settings)
        if info.snowflake_alpha is not None:
            space = SpaceService.snowflake(space, info.snowflake_alpha, settings)
        return space

    @staticmethod
    def default_u(name: str, space: PointCloudSpace) -> ScalarField:
        """The fixture's function: 1 on the x_n and 0 on the y_n, or an expression of the coordinates."""
        info = FixtureService.get(name)
        if info.u == "indicator:x":
            return ScalarField.function(np.array([
                1.0 if space.label_of(i).startswith("x") else 0.0 for i in range(space.n)
            ]))
        return ScalarField.function(evaluate_on_coords(info.u or "0", space.coords))

    @staticmethod
    def write(directory: Union[str, Path], settings: Optional[Settings] = None) -> List[Path]:
        """Write every fixture space as point-cloud JSON plus a manifest.json."""
        directory = Path(directory)
        paths = []
        for info in _catalog():
            space = FixtureService.build(info.name, settings)
            path = directory / f"{info.name}.json"
            write_text(path, dumps(SpaceService.to_document(space).model_dump()))
            paths.append(path)
        manifest = directory / "manifest.json"
        write_text(manifest, dumps([info.model_dump() for info in _catalog()]))
        paths.append(manifest)
        logger.info("Wrote %d fixtures to %s", len(paths) - 1, directory)
        return paths
