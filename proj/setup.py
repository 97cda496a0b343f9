"""CMake-driven build of the native extension.

The extension itself is configured in CMakeLists.txt; this shim makes
`pip install .` (and editable installs) drive that build and drop the
resulting module inside the otdet package.
"""

import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source_dir = Path(__file__).parent.resolve()
        build_temp = Path(self.build_temp).resolve() / ext.name
        build_temp.mkdir(parents=True, exist_ok=True)
        cfg = "Debug" if self.debug else "Release"
        subprocess.run(
            [
                "cmake",
                "-S", str(source_dir),
                "-B", str(build_temp),
                f"-DCMAKE_BUILD_TYPE={cfg}",
                f"-DPython3_EXECUTABLE={sys.executable}",
                "-DOTDET_BUILD_TESTS=OFF",
            ],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build_temp), "--target", "_otdet"],
            check=True,
        )
        built = next((build_temp / "python" / "otdet").glob("_otdet*"))
        ext_path = Path(self.get_ext_fullpath(ext.name)).resolve()
        ext_path.parent.mkdir(parents=True, exist_ok=True)
        self.copy_file(str(built), str(ext_path))


setup(
    packages=["otdet"],
    package_dir={"otdet": "python/otdet"},
    ext_modules=[CMakeExtension("otdet._otdet")],
    cmdclass={"build_ext": CMakeBuild},
)
