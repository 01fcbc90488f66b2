"""dicomvault: a multi-tenant DICOMweb archive with role-based access control."""

__version__ = "0.1.0"
