from setuptools import setup, find_packages

setup(
    name="atcopt",
    version="1.0.0",
    author="D. L. Kessler, A. M. Sorensen",
    description=("Optimization-based atomistic-to-continuum coupling for point defects"),
    license="MIT",
    packages=find_packages(include=["atcopt*"], exclude=["docs*", "tests*", "build*"]),
    python_requires='>=3.8',
    install_requires=[
        "numpy>=1.22",
        "scipy>=1.12",
        "tomli>=1.1.0; python_version < '3.11'",
    ],
    extras_require={
        "test": ["pytest>=7"],
    },
    entry_points={
        "console_scripts": ["atc=atcopt.cli:main"],
    },
    classifiers=[],
)
