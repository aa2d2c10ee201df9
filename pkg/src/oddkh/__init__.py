"""纽结与链环的奇/偶 Khovanov 同调计算引擎"""

__version__ = "1.0.0"
