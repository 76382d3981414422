"""
Validadores de entrada para el laboratorio Glasner
"""

import logging
import numbers
from fractions import Fraction
from typing import Any, List, Sequence

logger = logging.getLogger(__name__)

class ValidationError(Exception):
    """Error de validación personalizado"""
    pass

class InputValidators:
    """Validadores de datos de entrada compartidos por la librería, la CLI y la API"""

    @staticmethod
    def validate_eps(eps: float) -> float:
        """
        Valida el radio de densidad.
        Args:
            eps: Radio epsilon
        Returns:
            float: El mismo valor
        Raises:
            ValidationError: Si no cumple 0 < eps < 1/2
        """
        try:
            value = float(eps)
        except (TypeError, ValueError):
            raise ValidationError(f"eps debe ser numérico, se recibió {eps!r}")
        if not (0.0 < value < 0.5):
            raise ValidationError(f"eps debe cumplir 0 < eps < 1/2 (eps={value})")
        return value

    @staticmethod
    def validate_positive_int(value: Any, name: str) -> int:
        number = parse_int(value, name)
        if number <= 0:
            raise ValidationError(f"{name} debe ser positivo (se recibió {number})")
        return number

    @staticmethod
    def validate_nonzero_vector(vector: Sequence[Any], name: str = "vector") -> None:
        if not vector or all(Fraction(v) == 0 for v in vector):
            raise ValidationError(f"{name} no puede ser el vector cero")

    @staticmethod
    def validate_int_matrix(matrix: Any, rows: int = None, cols: int = None, name: str = "matriz") -> List[List[int]]:
        """
        Valida una matriz entera (acepta enteros o strings de enteros de precisión arbitraria).
        Returns:
            List[List[int]]: Copia con enteros de Python
        """
        if not isinstance(matrix, (list, tuple)) or not matrix:
            raise ValidationError(f"{name} debe ser una lista no vacía de filas")
        parsed: List[List[int]] = []
        width = None
        for row in matrix:
            if not isinstance(row, (list, tuple)):
                raise ValidationError(f"{name}: cada fila debe ser una lista")
            parsed_row = [parse_int(x, name) for x in row]
            if width is None:
                width = len(parsed_row)
            elif len(parsed_row) != width:
                raise ValidationError(f"{name}: filas de longitud distinta")
            parsed.append(parsed_row)
        if rows is not None and len(parsed) != rows:
            raise ValidationError(f"{name}: se esperaban {rows} filas, hay {len(parsed)}")
        if cols is not None and width != cols:
            raise ValidationError(f"{name}: se esperaban {cols} columnas, hay {width}")
        return parsed

    @staticmethod
    def validate_square_int_matrix(matrix: Any, dim: int = None, name: str = "matriz") -> List[List[int]]:
        parsed = InputValidators.validate_int_matrix(matrix, name=name)
        if len(parsed) != len(parsed[0]):
            raise ValidationError(f"{name} debe ser cuadrada")
        if dim is not None and len(parsed) != dim:
            raise ValidationError(f"{name} debe ser {dim}x{dim}")
        return parsed

    @staticmethod
    def validate_payload_keys(payload: Any, required: Sequence[str], name: str = "archivo") -> None:
        if not isinstance(payload, dict):
            raise ValidationError(f"{name}: se esperaba un objeto JSON")
        missing = [key for key in required if key not in payload]
        if missing:
            raise ValidationError(f"{name}: faltan campos {', '.join(missing)}")


def parse_int(value: Any, name: str = "valor") -> int:
    """
    Convierte a entero sin truncar.
    Acepta enteros (también de numpy), strings de enteros, Fraction con denominador 1
    y floats integrales; cualquier otra cosa es ValidationError.
    """
    if isinstance(value, bool):
        raise ValidationError(f"{name}: se esperaba un entero, se recibió {value!r}")
    if isinstance(value, numbers.Integral):
        return int(value)
    if isinstance(value, str):
        try:
            return int(value.strip())
        except ValueError:
            raise ValidationError(f"{name}: {value!r} no es un entero")
    if isinstance(value, Fraction) and value.denominator == 1:
        return int(value)
    if isinstance(value, float) and value.is_integer():
        return int(value)
    raise ValidationError(f"{name}: se esperaba un entero, se recibió {value!r}")


def parse_fraction(value: Any) -> Fraction:
    """Acepta [num, den], "num/den", enteros o Fraction."""
    try:
        if isinstance(value, Fraction):
            return value
        if isinstance(value, (list, tuple)) and len(value) == 2:
            return Fraction(parse_int(value[0], "numerador"), parse_int(value[1], "denominador"))
        if isinstance(value, (int, str)):
            return Fraction(value)
    except (ValueError, ZeroDivisionError) as e:
        raise ValidationError(f"Racional inválido {value!r}: {e}")
    raise ValidationError(f"Racional inválido {value!r}")
