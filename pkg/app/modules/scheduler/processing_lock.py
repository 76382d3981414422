import threading

# Serializa los experimentos pesados lanzados desde la API y la CLI
EXPERIMENT_LOCK = threading.Lock()
