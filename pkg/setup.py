#!/usr/bin/env python3
"""
plandiv setup script
Installs the library, the `plandiv` command and the API
"""

from pathlib import Path

from setuptools import find_packages, setup

HERE = Path(__file__).parent


def read_requirements(name: str = "requirements.txt"):
    """Requirement lines without comments or test-only packages"""
    requirements = []
    for line in (HERE / name).read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#") and not line.startswith("pytest"):
            requirements.append(line)
    return requirements


setup(
    name="plandiv",
    version="0.1.0",
    description="Plan similarity metrics and diverse plan selection for PDDL planning tasks",
    long_description=(HERE / "README.md").read_text(encoding="utf-8"),
    long_description_content_type="text/markdown",
    packages=find_packages(include=["plandiv", "plandiv.*"]),
    python_requires=">=3.9",
    install_requires=read_requirements(),
    extras_require={"test": ["pytest>=7.4.0"]},
    entry_points={"console_scripts": ["plandiv=plandiv.cli:main"]},
)
