#!/usr/bin/env python3
"""
Setup script for itlbench
Workbench for intuitionistic temporal logic over dynamic posets
"""

from setuptools import setup, find_packages


# Read the README file for long description
def read_readme():
    try:
        with open("README.md", "r", encoding="utf-8") as f:
            return f.read()
    except OSError:
        return "Workbench for intuitionistic temporal logic over dynamic posets"


# Read requirements
def read_requirements(filename="requirements.txt"):
    try:
        with open(filename, "r", encoding="utf-8") as f:
            lines = [line.split("#")[0].strip() for line in f]
            return [line for line in lines if line]
    except OSError:
        return ["numpy>=1.21.0", "lark>=1.1.0"]


# Get version from package
def get_version():
    try:
        with open("src/itlbench/__init__.py", "r") as f:
            for line in f:
                if line.startswith("__version__"):
                    return line.split('"')[1]
    except OSError:
        pass
    return "1.0.0"


setup(
    name="itlbench",
    version=get_version(),
    description="Model checking, bisimulations and countermodel search for intuitionistic temporal logic",
    long_description=read_readme(),
    long_description_content_type="text/markdown",

    # Package configuration
    package_dir={"": "src"},
    packages=find_packages(where="src"),
    include_package_data=True,

    # Entry points
    entry_points={
        "console_scripts": [
            "itlbench=itlbench.cli:main",
        ],
    },

    # Dependencies
    python_requires=">=3.8",
    install_requires=read_requirements(),

    extras_require={
        "dev": [
            "pytest>=7.0.0",
            "pytest-cov>=4.0.0",
            "black>=23.0.0",
            "flake8>=6.0.0",
            "mypy>=1.0.0",
        ],
    },

    # Metadata
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],

    keywords=["logic", "temporal logic", "intuitionistic logic", "model checking", "bisimulation"],

    platforms=["any"],

    zip_safe=False,
)
