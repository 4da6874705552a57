"""
Setup script for plain setuptools installs.
"""
from setuptools import find_packages, setup

setup(
    name="functional-pcca",
    version="0.1.0",
    description="Functional canonical and partial canonical correlation analysis",
    author="Prashant Gupta",
    author_email="prashant10gpt@gmail.com",
    package_dir={"": "src"},
    packages=find_packages(where="src"),
    install_requires=[
        "numpy>=1.24",
        "scipy>=1.10",
        "rich>=13.5.2",
    ],
    entry_points={
        "console_scripts": [
            "fpcca=fpcca.cli:main",
        ],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
    ],
    python_requires=">=3.9",
)
