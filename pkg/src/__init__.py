"""
ZonoSVM
Entrenamiento de SVM soft-margin optimizando sobre zonotopos y envolventes convexas reducidas
"""

__version__ = "1.0.0"
__author__ = "ZonoSVM Team"
