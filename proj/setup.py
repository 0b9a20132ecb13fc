from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ext = Pybind11Extension(
    "_racer",
    sources=[
        "src/types.cpp",
        "src/logits_tree.cpp",
        "src/automaton.cpp",
        "src/models.cpp",
        "src/verifier.cpp",
        "src/composer.cpp",
        "src/session.cpp",
        "bindings/pymodule.cpp",
    ],
    include_dirs=["include", "vendor"],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
