export { RESULTS_COLUMNS, ResultRow, SchemaError, parseResults, seriesKey, median } from "./schema";
export { FIGURE_KINDS, FigureKind, renderFigure } from "./figures";
