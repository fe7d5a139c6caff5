# User value: This package produces reproducible synthetic streams and scores how well a model recovered them.
