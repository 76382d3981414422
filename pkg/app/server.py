#!/usr/bin/env python3
import os
import sys

import uvicorn

# Agregar el directorio padre al path para importaciones absolutas
parent_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, parent_dir)

from app.api.api import app
from app.config.settings import settings

if __name__ == "__main__":
    uvicorn.run(app, host=settings.API_HOST, port=settings.API_PORT)
