"""
Setup script for limitfem
"""
from setuptools import setup

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

with open("requirements.txt", "r", encoding="utf-8") as fh:
    requirements = [line.strip() for line in fh if line.strip() and not line.startswith("#")]

setup(
    name="limitfem",
    version="1.0.0",
    description="Q1 finite elements for strain-limiting thermoelasticity on a square with an edge slit",
    long_description=long_description,
    long_description_content_type="text/markdown",
    py_modules=[
        "assembly",
        "config",
        "constitutive",
        "errors",
        "fem_core",
        "linalg",
        "main",
        "mesh",
        "mms",
        "models",
        "output_manager",
        "postproc",
        "solver",
    ],
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Physics",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
    ],
    python_requires=">=3.9",
    install_requires=requirements,
    extras_require={"dev": ["pytest>=7.0"]},
    entry_points={
        "console_scripts": [
            "limitfem=main:main",
        ],
    },
    keywords="finite elements, strain limiting, thermoelasticity, newton method, crack",
)
