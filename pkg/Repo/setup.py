import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="diva",
    version="0.1.0",
    description="k-anonymization by suppression under diversity constraints",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["tests", "tests.*"]),
    install_requires=[
          'inflection',
          'networkx',
          'numpy',
          'pandas>=1.5',
          'PyYaml',
          'tqdm'
    ],
    entry_points={
        "console_scripts": ["diva=diva.cli:main"],
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires='>=3.9',
)
