from .content import PageExtraction, extract_page, extract_page_detail
from .document import PdfDocument, open_pdf
from .objects import (EncryptedPdfError, MalformedXrefError, PdfError, PdfSyntaxError,
                      UnsupportedFilterError)
from .raster import (DEFAULT_TEMPLATE, ExternalToolError, RasterizerConfig, load_raster,
                     rasterize_page, save_raster)

__all__ = [
    "DEFAULT_TEMPLATE", "EncryptedPdfError", "ExternalToolError", "MalformedXrefError",
    "PageExtraction", "PdfDocument", "PdfError", "PdfSyntaxError", "RasterizerConfig",
    "UnsupportedFilterError", "extract_page", "extract_page_detail", "load_raster",
    "open_pdf", "rasterize_page", "save_raster",
]
