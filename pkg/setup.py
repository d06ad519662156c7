# Copyright 2026 The numba-hjb Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


import os
import re

from setuptools import find_packages, setup


def get_version():
    path = os.path.join(os.path.dirname(__file__), "numba_hjb", "__init__.py")
    with open(path) as f:
        match = re.search(r'^__version__ = "([^"]+)"', f.read(), re.M)
    return match.group(1)


packages = find_packages(include=["numba_hjb", "numba_hjb.*"])
install_requires = [
    "numba >={},<{}".format("0.53.1", "0.60"),
    "numpy",
    "scipy",
    "packaging",
]

metadata = dict(
    name="numba-hjb",
    version=get_version(),
    description="Mild-solution solver and verification harness for the stationary "
    "HJB equation of boundary-controlled Ornstein-Uhlenbeck dynamics",
    packages=packages,
    install_requires=install_requires,
    extras_require={"test": ["pytest"]},
    include_package_data=True,
    package_data={"numba_hjb": ["examples/*.cfg"]},
    author="The numba-hjb Authors",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: Apache Software License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: Implementation :: CPython",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    entry_points={
        "console_scripts": [
            "numba-hjb = numba_hjb.cli:main",
        ]
    },
)

setup(**metadata)
