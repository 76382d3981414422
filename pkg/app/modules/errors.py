class GlasnerLabError(Exception):
    """Raíz de los errores del laboratorio."""
    pass

class DimensionMismatchError(GlasnerLabError):
    """Dimensiones incompatibles entre puntos, matrices o conjuntos."""
    pass

class PrecisionError(GlasnerLabError):
    """Se pidió una operación exacta sobre datos en punto flotante."""
    pass

class BudgetExceededError(GlasnerLabError):
    """Se superó un presupuesto de escala de escritorio (bola, árbol, símbolos)."""
    pass

class HypothesisViolationError(GlasnerLabError):
    """La entrada viola una hipótesis del teorema que se está ejercitando."""
    pass

class SoundnessError(GlasnerLabError):
    """Un hallazgo de búsqueda no pasó la re-verificación independiente. Es un bug."""
    pass
