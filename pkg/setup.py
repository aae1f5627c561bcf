from setuptools import find_packages, setup

setup(
    name="miregion",
    version="0.1.0",
    description="Mutual information region, extended Gray-Wyner rate regions and extreme-point information quantities",
    packages=find_packages(exclude=["tests"]),
    python_requires=">=3.10",
    install_requires=[
        "numpy>=1.24,<2.0",
        "pandas>=2.0",
        "pydantic>=2.5",
        "pyyaml>=6.0",
        "scipy>=1.11",
        "networkx>=3.1",
    ],
    extras_require={"test": ["pytest>=7.4"]},
    entry_points={"console_scripts": ["miregion=miregion.cli:main"]},
)
