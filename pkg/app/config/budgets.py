"""
Presupuestos centralizados de escala "de escritorio".
Todos los motores fallan de forma explícita al superarlos en lugar de truncar en silencio.
"""
import math

# Densidad certificada (módulo torus)
DEFAULT_MAX_REFINEMENTS = 8       # Niveles de refinamiento de la malla
DENSITY_GRID_BUDGET = 2_000_000   # Máximo de centros de celda por nivel
DENSITY_CHUNK = 4096              # Centros evaluados por bloque vectorizado
FLOAT_TOLERANCE = 1e-12           # Guardia en ambos lados de la certificación

# Sumas exponenciales (módulo expsum)
COMPLETE_SUM_MAX_Q = 10**6        # Módulo máximo para sumas completas
HUA_DELTA = 0.05                  # delta en q^(1/D - delta)
SLOPE_SLACK = 0.3                 # Holgura de la pendiente log-log de h_q

# Matrices polinomiales
FLOAT_COND_THRESHOLD = 1e8        # Número de condición máximo en la verificación heurística

# Álgebra lineal entera
SNF_MAX_DIM = 8                   # Dimensión documentada (no se impone)

# Semigrupos (módulo cayley)
CAYLEY_ELEMENT_BUDGET = 10**6     # Elementos distintos en una bola de Cayley
POLYNOMIALIZE_MONOMIAL_BUDGET = 200_000  # Monomios de Q_N multivariado

# Paseos aleatorios (módulo walk)
EXACT_TREE_BUDGET = 10**6         # Nodos por nivel del árbol de palabras
MONTE_CARLO_CHUNK = 10_000        # Caminos por flujo RNG derivado de la semilla
PLATEAU_SLACK = 0.05              # Holgura de monotonía de la meseta

# Búsqueda
SEARCH_BATCH_SIZE = 256           # Candidatos por lote paralelo
DEFAULT_N_MAX = 10**5
DEFAULT_BALL_RADIUS = 8


def lattice_box_size(M: int, d: int) -> int:
    """|B(M)| = (2M+1)^d - 1."""
    return (2 * M + 1) ** d - 1


def frequency_radius(d: int, eps: float) -> int:
    """M = ceil(d / eps) como en la ventana de Fourier de la cota BMV."""
    return math.ceil(d / eps - 1e-12)

# Cola de experimentos de la API
TASK_QUEUE_MAX_FINISHED = 200     # Trabajos terminados que se conservan para /tasks
