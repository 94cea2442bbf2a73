from setuptools import setup, find_packages

setup(
    name="omegamap",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "examples", "examples.*"]),
    install_requires=[
        "numpy",
        "scipy",
        "pandas",
        "humanfriendly",
        "ConfigArgParse",
        "tqdm",
        "tabulate",
        "jsonschema",
    ],
    include_package_data=True,
    package_data={
        "omegamap": ["assets/*.json"],
    },
    entry_points={
        "console_scripts": ["omega-map=omegamap.cli.main:main"],
    },
)

# pip install -e .
