from routers.cli import bank
from routers.cli import rx
from routers.cli import sweep
from routers.cli import theory
from routers.cli import tx
