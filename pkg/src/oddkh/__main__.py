"""支持 python -m oddkh 方式调用"""

from .cli import main

main()
