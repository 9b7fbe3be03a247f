"""
Export/Import Module
CSV, JSON and gnuplot writers for run results; form-package reader
"""

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from config import Config
from errors import PackageError, TwistvalsError
from field_arith import PrimeElement, QuadraticField, field, normalize_prime
from lattice_theta import SphericalPolynomial, ThetaSeries, ZFLattice
from logger import logger
from quaternion import QuaternionAlgebra, QuatElement, QuatOrder, left_order, right_ideal, ternary_lattice
from waldspurger import NewformPackage

THETA_COLUMNS = ['a', 'b', 'trace', 'coeff_num', 'coeff_den']
DISC_COLUMNS = ['a', 'b', 'abs_norm', 'trace_abs', 'is_rational', 'permitted']
TWIST_COLUMNS = ['a', 'b', 'abs_norm', 'c_num', 'c_den', 'vanishes', 'normalized']
COUNT_COLUMNS = ['X', 'n_all', 'n_permitted', 'n_vanish', 'n_rational', 'n_vanish_rational']
RATIO_COLUMNS = ['Nq', 'q', 'a_q', 'num', 'den', 'ratio', 'prediction']
HISTOGRAM_COLUMNS = ['bin_lo', 'bin_hi', 'count']


class DataExporter:
    """Write run results; every float is printed with Config.FLOAT_DIGITS significant digits"""

    @staticmethod
    def to_csv(rows: List[Dict], path: Path, columns: Sequence[str]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        df = pd.DataFrame(rows, columns=list(columns))
        df.to_csv(path, index=False, float_format=f"%.{Config.FLOAT_DIGITS}g", lineterminator='\n')
        logger.debug(f"Wrote {len(df)} rows to {path}")
        return path

    @staticmethod
    def theta_rows(series: ThetaSeries) -> List[Dict]:
        return [
            {'a': nu.a, 'b': nu.b, 'trace': nu.trace(), 'coeff_num': c.numerator, 'coeff_den': c.denominator}
            for nu, c in series.sorted_items()
        ]

    @classmethod
    def export_theta(cls, series: ThetaSeries, path: Path) -> Path:
        return cls.to_csv(cls.theta_rows(series), path, THETA_COLUMNS)

    @classmethod
    def export_discriminants(cls, records, path: Path) -> Path:
        return cls.to_csv([r.as_row() for r in records], path, DISC_COLUMNS)

    @classmethod
    def export_twists(cls, records, path: Path) -> Path:
        return cls.to_csv([r.as_row() for r in records], path, TWIST_COLUMNS)

    @classmethod
    def export_counts(cls, series, path: Path) -> Path:
        return cls.to_csv(series.rows(), path, COUNT_COLUMNS)

    @classmethod
    def export_ratios(cls, ratios, path: Path) -> Path:
        return cls.to_csv([r.as_row() for r in ratios], path, RATIO_COLUMNS)

    @classmethod
    def export_histogram(cls, histogram, path: Path) -> Path:
        return cls.to_csv(histogram.rows(), path, HISTOGRAM_COLUMNS)

    @staticmethod
    def export_gnuplot(points: Sequence, path: Path, header: str) -> Path:
        """Whitespace-separated two-column file with a commented header"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        df = pd.DataFrame(list(points), columns=['X', 'value'])
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(f"# {header}\n")
            df.to_csv(f, sep=' ', index=False, header=False, float_format=f"%.{Config.FLOAT_DIGITS}g",
                      lineterminator='\n')
        return path

    @staticmethod
    def export_to_json(data: Any, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(data, f, indent=2, ensure_ascii=False, default=str)
        return path


def fraction_text(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


class PackageImporter:
    """
    Read a form package (JSON)

    Lattices come either from quaternion data (an order basis and, per class, right ideal
    generators whose left orders give the ternary lattices) or directly as doubled Gram
    matrices ("gram2") of "a+b*w" strings.
    """

    @staticmethod
    def resolve(name_or_path: str) -> Path:
        path = Path(name_or_path)
        if path.exists():
            return path
        candidate = Config.PACKAGES_DIR / f"{name_or_path}.json"
        if candidate.exists():
            return candidate
        raise PackageError(f"no package file {name_or_path!r}")

    @staticmethod
    def read_bytes(name_or_path: str) -> bytes:
        return PackageImporter.resolve(name_or_path).read_bytes()

    @classmethod
    def load(cls, name_or_path: str) -> NewformPackage:
        path = cls.resolve(name_or_path)
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise PackageError(f"{path}: invalid JSON ({e})") from e
        try:
            pkg = cls.from_dict(data)
        except PackageError:
            raise
        except (KeyError, TypeError, ValueError, TwistvalsError) as e:
            raise PackageError(f"{path}: {type(e).__name__}: {e}") from e
        logger.info(f"Loaded package {pkg.label} from {path} ({pkg.status}, H={pkg.H})")
        return pkg

    @staticmethod
    def _prime(F: QuadraticField, text: str) -> PrimeElement:
        return normalize_prime(F, F.parse(text))

    @staticmethod
    def _quaternion(algebra: QuaternionAlgebra, entry: Dict) -> QuatElement:
        return algebra.parse(entry['coords'], int(entry.get('den', 1)))

    @classmethod
    def from_dict(cls, data: Dict) -> NewformPackage:
        F = field(int(data['field']['d']))
        status = data.get('status', 'complete')
        if status not in ('complete', 'template'):
            raise PackageError(f"unknown package status {status!r}")
        weight = int(data['weight'])
        al_signs = {cls._prime(F, q): int(s) for q, s in data.get('al_signs', {}).items()}
        hecke = {cls._prime(F, row['prime']): int(row['a_q']) for row in data.get('hecke', [])}

        lattices: List[ZFLattice] = []
        polys: List[SphericalPolynomial] = []
        gammas: List[int] = []
        orders: List[QuatOrder] = []

        algebra: Optional[QuaternionAlgebra] = None
        base: Optional[QuatOrder] = None
        if 'algebra' in data:
            algebra = QuaternionAlgebra(F, F.parse(data['algebra']['a']), F.parse(data['algebra']['b']))
            basis = tuple(cls._quaternion(algebra, e) for e in data['order']['basis'])
            base = QuatOrder(algebra, basis, "O_1")

        for index, entry in enumerate(data.get('classes', []), start=1):
            if 'gram2' in entry:
                gram2 = tuple(tuple(F.parse(x) for x in row) for row in entry['gram2'])
                lattice = ZFLattice(F, gram2, entry.get('label', f"Lambda_{index}"))
            else:
                if base is None:
                    raise PackageError(f"class {index} needs quaternion data")
                generators = entry.get('ideal')
                if generators:
                    ideal = right_ideal(base, [cls._quaternion(algebra, g) for g in generators])
                    order = left_order(algebra, ideal, f"O_{index}")
                else:
                    order = QuatOrder(base.algebra, base.basis, f"O_{index}")
                orders.append(order)
                lattice = ternary_lattice(order)
            lattices.append(lattice)
            polys.append(SphericalPolynomial(lattice.rank, entry['poly']))
            gammas.append(int(entry['gamma_order']))

        return NewformPackage(
            F=F,
            level_gen=F.parse(data['level']),
            weight=weight,
            al_signs=al_signs,
            hecke=hecke,
            lattices=lattices,
            polys=polys,
            gamma_orders=gammas,
            label=data['label'],
            orders=orders,
            status=status,
            curve=str(data.get('curve', '')),
        )
