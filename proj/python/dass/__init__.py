from ._dass import *  # noqa: F401,F403
