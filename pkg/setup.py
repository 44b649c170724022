from setuptools import find_packages, setup


def _fetch_requirements(path):
    with open(path) as fd:
        return [r.strip() for r in fd.readlines() if r.strip() and not r.startswith("#")]


setup(
    author="polysafe Team",
    name="polysafe",
    version="0.1.0",
    packages=find_packages(include=["polysafe*"]),
    include_package_data=True,
    package_data={"polysafe": ["assets/*.json"]},
    install_requires=_fetch_requirements("requirements.txt"),
    extras_require={
        "dev": [
            "pytest",
        ]
    },
    entry_points={"console_scripts": ["polysafe = polysafe.cli:app"]},
    python_requires=">=3.10",
    classifiers=[
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
)
